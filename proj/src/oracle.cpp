#include "tlsh/oracle.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tlsh/core_model.hpp"
#include "tlsh/random.hpp"

namespace tlsh {

namespace {

Rational good_approx_mutant(unsigned x, unsigned theta) {
  const BinomialTable binom(x);
  const unsigned lo = (x - theta + 1) / 2;
  const unsigned hi = (x + theta) / 2;
  BigInt favourable = 0;
  for (unsigned i = lo == 0 ? 0 : lo - 1; i <= hi; ++i) favourable += binom(x, i);
  BigInt total = 1;
  total <<= x;
  return Rational(favourable, total);
}

OracleCheck check_hamming_manhattan(unsigned k) {
  OracleCheck c{"hamming_equals_manhattan", true, 0, ""};
  for (std::uint64_t a = 0; a < (1ULL << k); ++a) {
    const auto va = BitVector::from_mask(a, k);
    std::vector<std::int64_t> ia(k);
    for (unsigned i = 0; i < k; ++i) ia[i] = va[i];
    for (std::uint64_t b = 0; b < (1ULL << k); ++b) {
      std::vector<std::int64_t> ib(k);
      for (unsigned i = 0; i < k; ++i) ib[i] = (b >> i) & 1U;
      const auto ham = static_cast<std::uint64_t>(std::popcount(a ^ b));
      if (manhattan_distance(ia, ib) != ham) {
        c.passed = false;
        c.detail = "mismatch at a=" + std::to_string(a) + " b=" + std::to_string(b);
        return c;
      }
      ++c.cases;
    }
  }
  return c;
}

OracleCheck check_lower_bound(const OracleOptions& o) {
  OracleCheck c{"distance_lower_bound", true, 0, ""};
  std::uint64_t seed = o.seed;
  for (const unsigned b : {1U, 2U, 5U}) {
    for (unsigned m = 0; m < o.maps_per_b; ++m) {
      const auto f = random_balanced_map(o.k_grouped, b, seed++);
      const auto dist = brute_force_h1_distribution(o.k_grouped, b, f);
      c.cases += dist.total_pairs;
      if (!dist.lower_bound_holds()) {
        c.passed = false;
        c.detail = "violated for b=" + std::to_string(b);
      }
    }
  }
  return c;
}

OracleCheck check_good_approx(const OracleOptions& o) {
  OracleCheck c{"good_approx_exact", true, 0, ""};
  const std::vector<unsigned> one_group(o.k, 0);
  const auto dist = brute_force_h1_distribution(o.k, 1, one_group);
  for (unsigned x = 1; x <= o.k; ++x) {
    for (unsigned theta = 0; theta < x; ++theta) {
      const Rational expected =
          o.inject_good_approx_off_by_one ? good_approx_mutant(x, theta) : prob_good_approx(x, theta);
      ++c.cases;
      if (dist.conditional_at_most(x, theta) != expected) {
        c.passed = false;
        if (c.detail.empty()) {
          c.detail = "first mismatch at x=" + std::to_string(x) + " theta=" + std::to_string(theta);
        }
      }
    }
  }
  return c;
}

// Strict decrease from x to x + 2 wherever Pr(x) > 0. When theta = 0 and x
// is odd both sides are exactly 0 (|x - 2a| is odd), which is reported in
// the detail rather than as a failure.
OracleCheck check_lsh_property(const OracleOptions& o) {
  OracleCheck c{"lsh_property", true, 0, ""};
  unsigned degenerate = 0;
  for (unsigned x = 1; x <= o.x_max; ++x) {
    for (unsigned theta = 0; theta < x; ++theta) {
      ++c.cases;
      const Rational here = prob_good_approx(x, theta);
      const Rational next = prob_good_approx(x + 2, theta);
      if (here == 0 && next == 0) {
        ++degenerate;
        continue;
      }
      if (!(here > next)) {
        c.passed = false;
        c.detail = "not decreasing at x=" + std::to_string(x) + " theta=" + std::to_string(theta);
      }
    }
  }
  if (c.passed) c.detail = std::to_string(degenerate) + " zero-probability pairs (theta=0, odd x)";
  return c;
}

OracleCheck check_gamma(unsigned k_max) {
  OracleCheck c{"grouping_gamma", true, 0, ""};
  for (unsigned k = 1; k <= k_max; ++k) {
    for (unsigned l1 = 0; l1 <= k; ++l1) {
      for (unsigned l2 = 0; l2 <= k; ++l2) {
        const auto [hit, total] = brute_force_gamma_counts(k, l1, l2);
        ++c.cases;
        if (Rational(BigInt(hit), BigInt(total)) != grouping_gamma(k, l1, l2)) {
          c.passed = false;
          c.detail = "mismatch at k=" + std::to_string(k) + " l1=" + std::to_string(l1) +
                     " l2=" + std::to_string(l2);
        }
      }
    }
  }
  return c;
}

OracleCheck check_lossless_identity(unsigned k) {
  OracleCheck c{"singleton_groups_lossless", true, 0, ""};
  std::vector<unsigned> identity(k);
  std::iota(identity.begin(), identity.end(), 0U);
  const auto dist = brute_force_h1_distribution(k, k, identity);
  for (const auto& [key, count] : dist.counts) {
    c.cases += count;
    if (key.first != key.second) {
      c.passed = false;
      c.detail = "manhattan differs from hamming";
    }
  }
  return c;
}

}  // namespace

bool OracleReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

void OracleReport::write(std::ostream& out) const {
  for (const auto& c : checks) {
    out << "check=" << c.name << " status=" << (c.passed ? "PASS" : "FAIL") << " cases=" << c.cases
        << " detail=\"" << c.detail << "\"\n";
  }
  out << "summary status=" << (all_passed() ? "PASS" : "FAIL") << " checks=" << checks.size()
      << '\n';
}

OracleReport run_oracle_suite(const OracleOptions& o) {
  OracleReport r;
  r.checks.push_back(check_hamming_manhattan(std::min(o.k, 10U)));
  r.checks.push_back(check_lower_bound(o));
  r.checks.push_back(check_good_approx(o));
  r.checks.push_back(check_lsh_property(o));
  r.checks.push_back(check_gamma(std::min(o.k, 10U)));
  r.checks.push_back(check_lossless_identity(std::min(o.k, 8U)));
  return r;
}

std::vector<unsigned> random_balanced_map(unsigned k, unsigned b, std::uint64_t seed) {
  if (b == 0 || b > k) throw std::invalid_argument("random_balanced_map: need 0 < b <= k");
  const unsigned per = (k + b - 1) / b;
  std::vector<unsigned> slots;
  for (unsigned g = 0; g < b; ++g) {
    for (unsigned i = 0; i < per; ++i) slots.push_back(g);
  }
  Rng rng(seed);
  for (std::size_t i = slots.size(); i > 1; --i) {
    std::swap(slots[i - 1], slots[rng.below(i)]);
  }
  slots.resize(k);
  return slots;
}

}  // namespace tlsh
