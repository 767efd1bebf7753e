#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tlsh {

struct OracleOptions {
  unsigned k = 12;            ///< enumeration size for the b = 1 checks (<= 14)
  unsigned k_grouped = 10;    ///< enumeration size for the grouped-f bound
  unsigned maps_per_b = 10;   ///< random balanced maps tried per b
  unsigned x_max = 18;        ///< range of the monotonicity check
  std::uint64_t seed = 1;
  /// Negative control: evaluate the closed form with its lower summation
  /// bound shifted down by one. The exactness check must then fail.
  bool inject_good_approx_off_by_one = false;
};

struct OracleCheck {
  std::string name;
  bool passed = true;
  std::uint64_t cases = 0;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_passed() const;
  /// One `check=<name> status=PASS|FAIL cases=<n> detail="..."` line each.
  void write(std::ostream& out) const;
};

OracleReport run_oracle_suite(const OracleOptions& options = {});

/// A map of k queries onto b groups with at most ceil(k/b) per group, drawn
/// uniformly over balanced assignments.
std::vector<unsigned> random_balanced_map(unsigned k, unsigned b, std::uint64_t seed);

}  // namespace tlsh
