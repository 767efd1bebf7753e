#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "tlsh/core_model.hpp"
#include "tlsh/mds_tuner.hpp"

namespace tlsh {

/// Raised when a record position does not fit the configured capacity.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Curve { kZOrder, kHilbert };

struct LshConfig {
  unsigned k = 24;                ///< tracked-query window
  unsigned b = 8;                 ///< counter groups (2b physical entries per row)
  std::uint64_t epsilon = 1024;   ///< number of hash buckets (pages)
  std::uint64_t omega = 1024;     ///< record capacity
  std::uint64_t seed = 0;
  Curve curve = Curve::kZOrder;

  void validate() const;
  /// ceil(k / b): queries per shift period and the bound on every counter.
  unsigned period() const noexcept { return (k + b - 1) / b; }
  /// Bits per curve dimension, ceil(log2(period + 1)).
  unsigned bits_per_dim() const noexcept;
  unsigned dims() const noexcept { return 2 * b; }
};

/// Z-order (Morton) position of `counts` scaled onto [0, epsilon):
/// floor(z * epsilon / 2^(dims * bits_per_dim)). Bit j of dimension d lands
/// at bit j * dims + d of z. Throws std::logic_error if a count needs more
/// than `bits_per_dim` bits.
std::uint64_t z_value(std::span<const std::uint32_t> counts, unsigned bits_per_dim,
                      std::uint64_t epsilon);

/// Hilbert-curve position (Skilling's transform) with the same scaling.
std::uint64_t hilbert_value(std::span<const std::uint32_t> counts, unsigned bits_per_dim,
                            std::uint64_t epsilon);

/// Record utilization counters, 2b entries per row, with a global shift that
/// moves the allowed write region one entry to the right every period.
/// Entries vacated by the shift are cleared lazily, the next time a row is
/// touched or read.
class CounterBank {
 public:
  CounterBank() = default;
  explicit CounterBank(const LshConfig& config);

  std::uint64_t rows() const noexcept { return rows_; }
  unsigned width() const noexcept { return width_; }
  std::uint64_t shift() const noexcept { return shift_; }

  /// Advances the global shift to `shift` (never backwards).
  void advance_to(std::uint64_t shift);
  /// Entry written by group `g` under the current shift.
  unsigned slot_for_group(unsigned g) const noexcept;
  /// True iff entry `e` is inside the current allowed region.
  bool in_allowed_region(unsigned e) const noexcept;

  /// Increments the entry for group `g` in `row`, saturating at `limit`.
  /// Returns false if the counter was already saturated.
  bool increment(std::uint64_t row, unsigned g, unsigned limit);
  /// Logical counters of `row` (pending resets applied, no mutation).
  CounterVector view(std::uint64_t row) const;
  void view_into(std::uint64_t row, std::span<std::uint32_t> out) const;

  std::size_t memory_bytes() const noexcept;

 private:
  void catch_up(std::uint64_t row);

  std::uint64_t rows_ = 0;
  unsigned b_ = 0;
  unsigned width_ = 0;
  std::uint64_t shift_ = 0;
  std::vector<std::uint16_t> counts_;      // rows_ x width_
  std::vector<std::uint64_t> row_shift_;   // shift at which each row was last caught up
};

/// h = h2 o h1: counters maintained online from query access sets, grouped
/// by a tunable query-to-group map, projected onto a space-filling curve.
class TunableLsh {
 public:
  /// Uses the Min-Hash/MDS tuner for f.
  TunableLsh(const LshConfig& config, const MdsConfig& mds);
  /// Uses a caller-provided grouping (for example round-robin).
  TunableLsh(const LshConfig& config, std::unique_ptr<QueryGrouping> grouping);

  /// Feeds the next query: retunes f, then bumps one counter per accessed
  /// record. q.t must equal queries_seen(). Throws CapacityError for
  /// positions >= omega.
  void tune(const QueryAccess& q);

  /// Page for `record`, in [0, epsilon).
  std::uint64_t hash(std::uint64_t record) const;
  CounterVector counters(std::uint64_t record) const;

  const LshConfig& config() const noexcept { return config_; }
  const CounterBank& bank() const noexcept { return bank_; }
  const QueryGrouping& grouping() const noexcept { return *grouping_; }
  std::uint64_t queries_seen() const noexcept { return next_t_; }
  std::uint64_t saturated_increments() const noexcept { return saturated_; }

 private:
  LshConfig config_;
  CounterBank bank_;
  std::unique_ptr<QueryGrouping> grouping_;
  unsigned bits_per_dim_;
  std::uint64_t next_t_ = 0;
  std::uint64_t saturated_ = 0;
};

/// Concatenates the sampled bits (first sampled position most significant)
/// and scales the integer onto [0, epsilon).
std::uint64_t bit_sampling_hash(const BitVector& v, std::span<const unsigned> sampled,
                                std::uint64_t epsilon);
std::uint64_t bit_sampling_hash(std::uint64_t mask, std::span<const unsigned> sampled,
                                std::uint64_t epsilon);

/// `count` distinct positions drawn uniformly from [0, length).
std::vector<unsigned> draw_sample_positions(unsigned length, unsigned count, std::uint64_t seed);

/// Workload-oblivious uniform hash of the record id.
std::uint64_t static_hash(std::uint64_t record_id, std::uint64_t epsilon, std::uint64_t seed = 0);

}  // namespace tlsh
