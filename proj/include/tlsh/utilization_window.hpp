#pragma once

#include <cstdint>
#include <vector>

#include "tlsh/core_model.hpp"

namespace tlsh {

/// Exact record utilization vectors over the last k queries (k <= 64).
/// Bit (t mod k) of a record's mask is set iff query t, one of the k most
/// recent queries, accessed the record. Rows are aged lazily.
class UtilizationWindow {
 public:
  UtilizationWindow(unsigned k, std::uint64_t omega);

  /// q.t must be the next query number.
  void record(const QueryAccess& q);

  /// Mask over ring slots for the current window.
  std::uint64_t mask(std::uint64_t record) const;
  BitVector vector(std::uint64_t record) const { return BitVector::from_mask(mask(record), k_); }

  unsigned k() const noexcept { return k_; }
  std::uint64_t omega() const noexcept { return last_.size(); }
  std::uint64_t queries_seen() const noexcept { return next_t_; }

 private:
  /// Ring-slot mask of queries in (from, to], capped at the whole ring.
  std::uint64_t span_mask(std::uint64_t from, std::uint64_t to) const;

  unsigned k_;
  std::uint64_t next_t_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> last_;  // 1 + last query that touched the row, 0 = never
};

}  // namespace tlsh
