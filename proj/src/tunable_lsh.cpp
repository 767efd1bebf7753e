#include "tlsh/tunable_lsh.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "tlsh/random.hpp"

namespace tlsh {

namespace {

using Words = std::vector<std::uint64_t>;

void set_bit(Words& w, std::size_t pos) { w[pos / 64] |= 1ULL << (pos % 64); }

// floor(z * epsilon / 2^total_bits) for a little-endian multiword z < 2^total_bits.
std::uint64_t scale_onto(const Words& z, std::size_t total_bits, std::uint64_t epsilon) {
  Words product(z.size() + 1, 0);
  unsigned __int128 carry = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const unsigned __int128 p = static_cast<unsigned __int128>(z[i]) * epsilon + carry;
    product[i] = static_cast<std::uint64_t>(p);
    carry = p >> 64;
  }
  product[z.size()] = static_cast<std::uint64_t>(carry);
  const std::size_t word = total_bits / 64;
  const unsigned offset = total_bits % 64;
  std::uint64_t out = product[word] >> offset;
  if (offset != 0 && word + 1 < product.size()) out |= product[word + 1] << (64 - offset);
  return out;
}

void check_fits(std::span<const std::uint32_t> counts, unsigned bits_per_dim) {
  for (const auto c : counts) {
    if (bits_per_dim < 32 && (c >> bits_per_dim) != 0) {
      throw std::logic_error("space-filling curve: counter " + std::to_string(c) +
                             " does not fit in " + std::to_string(bits_per_dim) + " bits");
    }
  }
}

void check_curve_args(std::span<const std::uint32_t> counts, unsigned bits_per_dim,
                      std::uint64_t epsilon) {
  if (counts.empty() || bits_per_dim == 0 || bits_per_dim > 32) {
    throw std::invalid_argument("space-filling curve: need >= 1 dimension and 1..32 bits");
  }
  if (epsilon == 0) throw std::invalid_argument("space-filling curve: epsilon must be >= 1");
  check_fits(counts, bits_per_dim);
}

}  // namespace

void LshConfig::validate() const {
  if (k == 0 || b == 0) throw std::invalid_argument("LshConfig: k and b must be positive");
  if (b > k) throw std::invalid_argument("LshConfig: b must not exceed k");
  if (epsilon == 0) throw std::invalid_argument("LshConfig: epsilon must be >= 1");
  if (omega == 0) throw std::invalid_argument("LshConfig: omega must be >= 1");
  if (period() > 65535) throw std::invalid_argument("LshConfig: ceil(k/b) must fit 16 bits");
}

unsigned LshConfig::bits_per_dim() const noexcept {
  return static_cast<unsigned>(std::bit_width(period()));
}

std::uint64_t z_value(std::span<const std::uint32_t> counts, unsigned bits_per_dim,
                      std::uint64_t epsilon) {
  check_curve_args(counts, bits_per_dim, epsilon);
  const std::size_t dims = counts.size();
  const std::size_t total = dims * bits_per_dim;
  if (total <= 64) {
    std::uint64_t z = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      for (unsigned j = 0; j < bits_per_dim; ++j) {
        z |= static_cast<std::uint64_t>((counts[d] >> j) & 1U) << (j * dims + d);
      }
    }
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(z) * epsilon) >> total);
  }
  Words z((total + 63) / 64, 0);
  for (std::size_t d = 0; d < dims; ++d) {
    for (unsigned j = 0; j < bits_per_dim; ++j) {
      if ((counts[d] >> j) & 1U) set_bit(z, j * dims + d);
    }
  }
  return scale_onto(z, total, epsilon);
}

std::uint64_t hilbert_value(std::span<const std::uint32_t> counts, unsigned bits_per_dim,
                            std::uint64_t epsilon) {
  check_curve_args(counts, bits_per_dim, epsilon);
  const std::size_t n = counts.size();
  std::vector<std::uint32_t> x(counts.begin(), counts.end());
  // Skilling, "Programming the Hilbert curve": axes to transposed index.
  const std::uint32_t top = 1U << (bits_per_dim - 1);
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) x[i] ^= x[i - 1];
  std::uint32_t t = 0;
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    if (x[n - 1] & q) t ^= q - 1;
  }
  for (auto& xi : x) xi ^= t;

  // Transposed form: plane j (MSB first), dimension 0 most significant.
  const std::size_t total = n * bits_per_dim;
  Words h((total + 63) / 64, 0);
  std::size_t pos = total;
  for (unsigned j = bits_per_dim; j-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      --pos;
      if ((x[i] >> j) & 1U) set_bit(h, pos);
    }
  }
  return scale_onto(h, total, epsilon);
}

CounterBank::CounterBank(const LshConfig& config)
    : rows_(config.omega),
      b_(config.b),
      width_(2 * config.b),
      counts_(config.omega * 2 * config.b, 0),
      row_shift_(config.omega, 0) {}

void CounterBank::advance_to(std::uint64_t shift) {
  if (shift > shift_) shift_ = shift;
}

bool CounterBank::in_allowed_region(unsigned e) const noexcept {
  const auto start = static_cast<unsigned>(shift_ % width_);
  return (e + width_ - start) % width_ < b_;
}

unsigned CounterBank::slot_for_group(unsigned g) const noexcept {
  return in_allowed_region(g) ? g : g + b_;
}

// When the shift reaches s, entry (s + b - 1) mod 2b re-enters the allowed
// region and is cleared. Rows catch up on every missed step; 2b steps clear
// the whole row.
void CounterBank::catch_up(std::uint64_t row) {
  std::uint64_t& last = row_shift_[row];
  if (last == shift_) return;
  std::uint16_t* c = &counts_[row * width_];
  if (shift_ - last >= width_) {
    std::fill(c, c + width_, std::uint16_t{0});
  } else {
    for (std::uint64_t s = last + 1; s <= shift_; ++s) c[(s + b_ - 1) % width_] = 0;
  }
  last = shift_;
}

bool CounterBank::increment(std::uint64_t row, unsigned g, unsigned limit) {
  catch_up(row);
  std::uint16_t& c = counts_[row * width_ + slot_for_group(g)];
  if (c >= limit) return false;
  ++c;
  return true;
}

void CounterBank::view_into(std::uint64_t row, std::span<std::uint32_t> out) const {
  const std::uint16_t* c = &counts_[row * width_];
  for (unsigned e = 0; e < width_; ++e) out[e] = c[e];
  const std::uint64_t last = row_shift_[row];
  if (shift_ - last >= width_) {
    std::fill(out.begin(), out.end(), 0U);
  } else {
    for (std::uint64_t s = last + 1; s <= shift_; ++s) out[(s + b_ - 1) % width_] = 0;
  }
}

CounterVector CounterBank::view(std::uint64_t row) const {
  CounterVector out(width_);
  view_into(row, out);
  return out;
}

std::size_t CounterBank::memory_bytes() const noexcept {
  return counts_.capacity() * sizeof(std::uint16_t) + row_shift_.capacity() * sizeof(std::uint64_t);
}

TunableLsh::TunableLsh(const LshConfig& config, const MdsConfig& mds)
    : TunableLsh(config, [&] {
        MdsConfig m = mds;
        m.k = config.k;
        m.b = config.b;
        return std::make_unique<MdsTuner>(m);
      }()) {}

TunableLsh::TunableLsh(const LshConfig& config, std::unique_ptr<QueryGrouping> grouping)
    : config_(config), grouping_(std::move(grouping)) {
  config_.validate();
  if (!grouping_ || grouping_->groups() != config_.b) {
    throw std::invalid_argument("TunableLsh: grouping must produce exactly b groups");
  }
  bank_ = CounterBank(config_);
  bits_per_dim_ = config_.bits_per_dim();
}

void TunableLsh::tune(const QueryAccess& q) {
  if (q.t != next_t_) {
    throw std::invalid_argument("TunableLsh::tune: expected query " + std::to_string(next_t_) +
                                ", got " + std::to_string(q.t));
  }
  for (const auto p : q.positions) {
    if (p >= config_.omega) {
      throw CapacityError("TunableLsh::tune: position " + std::to_string(p) +
                          " exceeds record capacity");
    }
  }
  grouping_->reconfigure(q);
  const unsigned period = config_.period();
  bank_.advance_to(q.t / period);
  const unsigned g = grouping_->f(q.t);
  for (const auto p : q.positions) {
    if (!bank_.increment(p, g, period)) ++saturated_;
  }
  ++next_t_;
}

CounterVector TunableLsh::counters(std::uint64_t record) const {
  if (record >= config_.omega) throw std::invalid_argument("TunableLsh: record id out of range");
  return bank_.view(record);
}

std::uint64_t TunableLsh::hash(std::uint64_t record) const {
  if (record >= config_.omega) throw std::invalid_argument("TunableLsh: record id out of range");
  std::uint32_t buf[128];
  std::vector<std::uint32_t> heap;
  std::span<std::uint32_t> row;
  if (bank_.width() <= std::size(buf)) {
    row = std::span<std::uint32_t>(buf, bank_.width());
  } else {
    heap.resize(bank_.width());
    row = heap;
  }
  bank_.view_into(record, row);
  return config_.curve == Curve::kZOrder ? z_value(row, bits_per_dim_, config_.epsilon)
                                         : hilbert_value(row, bits_per_dim_, config_.epsilon);
}

std::uint64_t bit_sampling_hash(std::uint64_t mask, std::span<const unsigned> sampled,
                                std::uint64_t epsilon) {
  if (epsilon == 0) throw std::invalid_argument("bit_sampling_hash: epsilon must be >= 1");
  if (sampled.size() > 64) throw std::invalid_argument("bit_sampling_hash: at most 64 samples");
  unsigned __int128 v = 0;
  for (const auto pos : sampled) {
    if (pos >= 64) throw std::invalid_argument("bit_sampling_hash: position out of range");
    v = (v << 1) | ((mask >> pos) & 1U);
  }
  return static_cast<std::uint64_t>((v * epsilon) >> sampled.size());
}

std::uint64_t bit_sampling_hash(const BitVector& vec, std::span<const unsigned> sampled,
                                std::uint64_t epsilon) {
  if (epsilon == 0) throw std::invalid_argument("bit_sampling_hash: epsilon must be >= 1");
  if (sampled.size() > 64) throw std::invalid_argument("bit_sampling_hash: at most 64 samples");
  unsigned __int128 v = 0;
  for (const auto pos : sampled) {
    if (pos >= vec.size()) throw std::invalid_argument("bit_sampling_hash: position out of range");
    v = (v << 1) | (vec[pos] ? 1U : 0U);
  }
  return static_cast<std::uint64_t>((v * epsilon) >> sampled.size());
}

std::vector<unsigned> draw_sample_positions(unsigned length, unsigned count, std::uint64_t seed) {
  if (count > length) throw std::invalid_argument("draw_sample_positions: count > length");
  std::vector<unsigned> all(length);
  std::iota(all.begin(), all.end(), 0U);
  Rng rng(seed);
  for (unsigned i = 0; i < count; ++i) {
    const auto j = i + static_cast<unsigned>(rng.below(length - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

std::uint64_t static_hash(std::uint64_t record_id, std::uint64_t epsilon, std::uint64_t seed) {
  if (epsilon == 0) throw std::invalid_argument("static_hash: epsilon must be >= 1");
  return SeededHash(seed)(record_id) % epsilon;
}

}  // namespace tlsh
