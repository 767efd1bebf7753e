#pragma once

#include <cstdint>
#include <random>

namespace tlsh {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded 64-bit hash: a multiply-add keyed by the seed followed by the
/// splitmix finalizer. Bit-exact on every platform.
class SeededHash {
 public:
  explicit constexpr SeededHash(std::uint64_t seed = 0) noexcept
      : mul_(splitmix64(seed) | 1ULL), add_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  constexpr std::uint64_t operator()(std::uint64_t x) const noexcept {
    return splitmix64(x * mul_ + add_);
  }

 private:
  std::uint64_t mul_;
  std::uint64_t add_;
};

/// Generator wrapper with portable draws. std distributions are
/// implementation-defined, so bounded integers and reals are derived here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n), n > 0 (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tlsh
