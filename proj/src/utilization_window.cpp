#include "tlsh/utilization_window.hpp"

#include <stdexcept>
#include <string>

namespace tlsh {

UtilizationWindow::UtilizationWindow(unsigned k, std::uint64_t omega)
    : k_(k), bits_(omega, 0), last_(omega, 0) {
  if (k == 0 || k > 64) throw std::invalid_argument("UtilizationWindow: k must be in [1, 64]");
}

std::uint64_t UtilizationWindow::span_mask(std::uint64_t from, std::uint64_t to) const {
  const std::uint64_t full = k_ == 64 ? ~0ULL : (1ULL << k_) - 1;
  if (to <= from) return 0;
  if (to - from >= k_) return full;
  std::uint64_t m = 0;
  for (std::uint64_t t = from + 1; t <= to; ++t) m |= 1ULL << (t % k_);
  return m;
}

void UtilizationWindow::record(const QueryAccess& q) {
  if (q.t != next_t_) {
    throw std::invalid_argument("UtilizationWindow: expected query " + std::to_string(next_t_));
  }
  for (const auto p : q.positions) {
    if (p >= bits_.size()) throw std::invalid_argument("UtilizationWindow: position out of range");
    // clear slots of queries after the row's last touch, then set this one
    const std::uint64_t from = last_[p] == 0 ? (q.t >= k_ ? q.t - k_ : 0) : last_[p] - 1;
    std::uint64_t stale = span_mask(from, q.t);
    if (last_[p] == 0) stale = ~0ULL;
    bits_[p] = (bits_[p] & ~stale) | (1ULL << (q.t % k_));
    last_[p] = q.t + 1;
  }
  ++next_t_;
}

std::uint64_t UtilizationWindow::mask(std::uint64_t record) const {
  if (record >= bits_.size()) throw std::invalid_argument("UtilizationWindow: record out of range");
  if (last_[record] == 0 || next_t_ == 0) return 0;
  const std::uint64_t last_touch = last_[record] - 1;
  return bits_[record] & ~span_mask(last_touch, next_t_ - 1);
}

}  // namespace tlsh
