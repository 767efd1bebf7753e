#pragma once

// Shared domain types, exact distances, closed-form probabilities for the
// counter transform h1, and the exhaustive enumeration oracles that back the
// property tests in the rest of the library.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tlsh {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Fixed-length 0/1 vector. Used both for record utilization vectors (one bit
/// per tracked query) and query access vectors (one bit per record).
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t length) : bits_(length, 0) {}

  /// Parses a string of '0'/'1' characters; throws std::invalid_argument on
  /// any other character.
  static BitVector from_string(std::string_view s);
  /// Low `length` bits of `mask`, bit i at position i.
  static BitVector from_mask(std::uint64_t mask, std::size_t length);

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value = true) { bits_.at(i) = value ? 1 : 0; }
  std::size_t popcount() const noexcept;
  std::string to_string() const;

  bool operator==(const BitVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// One query's accessed record positions (the 1-bits of its access vector),
/// strictly increasing.
struct QueryAccess {
  std::uint64_t t = 0;
  std::vector<std::uint32_t> positions;

  /// Sorts and deduplicates `positions` into canonical form.
  static QueryAccess make(std::uint64_t t, std::vector<std::uint32_t> positions);
  /// Throws std::invalid_argument unless positions are strictly increasing
  /// and all below `omega`.
  void validate(std::uint64_t omega) const;

  bool operator==(const QueryAccess&) const = default;
};

using CounterVector = std::vector<std::uint32_t>;

std::size_t hamming_distance(const BitVector& a, const BitVector& b);
std::uint64_t manhattan_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b);
std::uint64_t manhattan_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Exact binomial coefficients from a Pascal's-rule table.
class BinomialTable {
 public:
  explicit BinomialTable(unsigned max_n);
  const BigInt& operator()(unsigned n, unsigned r) const;
  unsigned max_n() const noexcept { return max_n_; }

 private:
  unsigned max_n_;
  std::vector<std::vector<BigInt>> rows_;
};

/// Pr(manhattan(h1(r1), h1(r2)) <= theta | hamming(r1, r2) = x) for b = 1:
/// the sum of C(x, i) for i in [ceil((x - theta)/2), floor((x + theta)/2)]
/// over 2^x. Requires theta < x.
Rational prob_good_approx(unsigned x, unsigned theta);

/// True iff prob_good_approx(x, theta) > prob_good_approx(x + 2, theta) for
/// every x with theta < x <= x_max.
bool prob_monotonicity_check(unsigned theta, unsigned x_max);

/// The (x, theta) pairs, theta < x <= x_max, at which the strict decrease
/// from x to x + 2 does not hold.
std::vector<std::pair<unsigned, unsigned>> monotonicity_violations(unsigned theta, unsigned x_max);

/// Pr(manhattan(c1, c2) == hamming(r1, r2) | c1 = l1, c2 = l2) for b = 1
/// and vectors of length k, i.e. C(l_max, l_min) / C(k, l_min).
Rational grouping_gamma(unsigned k, unsigned l1, unsigned l2);

/// Applies h1: per-group popcounts of `r` under the query-to-group map.
CounterVector apply_h1(const BitVector& r, std::span<const unsigned> group_of_query, unsigned b);

/// Joint counts of (hamming(r1, r2), manhattan(h1(r1), h1(r2))) over vector
/// pairs.
struct DistanceDistribution {
  unsigned k = 0;
  unsigned b = 0;
  bool exhaustive = true;
  std::uint64_t total_pairs = 0;
  /// counts[{hamming, manhattan}]
  std::map<std::pair<unsigned, unsigned>, std::uint64_t> counts;

  std::uint64_t pairs_at_hamming(unsigned x) const;
  /// Empirical Pr(manhattan <= theta | hamming = x) as an exact fraction.
  Rational conditional_at_most(unsigned x, unsigned theta) const;
  /// True iff manhattan <= hamming for every observed pair.
  bool lower_bound_holds() const;
};

struct EnumerationOptions {
  /// Sample this many uniform pairs instead of enumerating all 4^k.
  std::optional<std::uint64_t> sample_pairs;
  std::uint64_t seed = 0;
};

/// Largest k for which all ordered pairs are enumerated.
inline constexpr unsigned kMaxExhaustiveK = 14;

/// Enumerates every ordered pair of length-k vectors (or a seeded sample
/// when requested) and tabulates distances before and after h1.
/// `group_of_query` must have k entries, each below b. Throws
/// std::invalid_argument if k exceeds kMaxExhaustiveK without sampling.
DistanceDistribution brute_force_h1_distribution(unsigned k, unsigned b,
                                                 std::span<const unsigned> group_of_query,
                                                 const EnumerationOptions& options = {});

/// Counts, over all pairs of length-k vectors with popcounts (l1, l2), those
/// whose Hamming distance equals |l1 - l2|. Returns {matching, total}.
std::pair<std::uint64_t, std::uint64_t> brute_force_gamma_counts(unsigned k, unsigned l1, unsigned l2);

double to_double(const Rational& r);

}  // namespace tlsh
