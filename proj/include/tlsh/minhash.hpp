#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "tlsh/random.hpp"

namespace tlsh {

/// Single-function Min-Hash value of a set of positional identifiers.
struct MinHashSignature {
  std::uint64_t value = 0;
  bool operator==(const MinHashSignature&) const = default;
};

template <typename Hash>
concept ElementHash = requires(const Hash& h, std::uint64_t x) {
  { h(x) } -> std::convertible_to<std::uint64_t>;
};

/// Minimum of `hash` over the elements. Order of `positions` is irrelevant.
template <typename T, ElementHash Hash>
MinHashSignature minhash(std::span<const T> positions, const Hash& hash) {
  if (positions.empty()) throw std::invalid_argument("minhash: empty set");
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const auto p : positions) {
    const std::uint64_t h = hash(static_cast<std::uint64_t>(p));
    if (h < best) best = h;
  }
  return MinHashSignature{best};
}

template <typename T>
MinHashSignature minhash(std::span<const T> positions, std::uint64_t seed) {
  return minhash(positions, SeededHash(seed));
}

/// 0 when the signatures collide, 1 otherwise.
constexpr unsigned minhash_distance(MinHashSignature a, MinHashSignature b) noexcept {
  return a == b ? 0U : 1U;
}

}  // namespace tlsh
