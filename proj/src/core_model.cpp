#include "tlsh/core_model.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "tlsh/random.hpp"

namespace tlsh {

BitVector BitVector::from_string(std::string_view s) {
  BitVector v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      v.bits_[i] = 1;
    } else if (s[i] != '0') {
      throw std::invalid_argument("BitVector: expected only '0' and '1' characters");
    }
  }
  return v;
}

BitVector BitVector::from_mask(std::uint64_t mask, std::size_t length) {
  BitVector v(length);
  for (std::size_t i = 0; i < length; ++i) v.bits_[i] = (mask >> i) & 1U;
  return v;
}

std::size_t BitVector::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitVector::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) s[i] = '1';
  }
  return s;
}

QueryAccess QueryAccess::make(std::uint64_t t, std::vector<std::uint32_t> positions) {
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  return QueryAccess{t, std::move(positions)};
}

void QueryAccess::validate(std::uint64_t omega) const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] >= omega) {
      throw std::invalid_argument("QueryAccess: position " + std::to_string(positions[i]) +
                                  " out of range");
    }
    if (i > 0 && positions[i - 1] >= positions[i]) {
      throw std::invalid_argument("QueryAccess: positions must be strictly increasing");
    }
  }
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming_distance: length mismatch");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

namespace {

template <typename T>
std::uint64_t manhattan_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("manhattan_distance: length mismatch");
  }
  std::uint64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] > b[i] ? static_cast<std::uint64_t>(a[i] - b[i])
                     : static_cast<std::uint64_t>(b[i] - a[i]);
  }
  return d;
}

}  // namespace

std::uint64_t manhattan_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  return manhattan_impl(a, b);
}

std::uint64_t manhattan_distance(std::span<const std::uint32_t> a,
                                 std::span<const std::uint32_t> b) {
  return manhattan_impl(a, b);
}

BinomialTable::BinomialTable(unsigned max_n) : max_n_(max_n), rows_(max_n + 1) {
  for (unsigned n = 0; n <= max_n; ++n) {
    rows_[n].resize(n + 1);
    rows_[n][0] = 1;
    rows_[n][n] = 1;
    for (unsigned r = 1; r < n; ++r) rows_[n][r] = rows_[n - 1][r - 1] + rows_[n - 1][r];
  }
}

const BigInt& BinomialTable::operator()(unsigned n, unsigned r) const {
  static const BigInt zero = 0;
  if (n > max_n_) throw std::out_of_range("BinomialTable: n exceeds table size");
  if (r > n) return zero;
  return rows_[n][r];
}

Rational prob_good_approx(unsigned x, unsigned theta) {
  if (x == 0 || theta >= x) {
    throw std::invalid_argument("prob_good_approx: requires 0 <= theta < x");
  }
  const BinomialTable binom(x);
  // a ranges over ceil((x - theta) / 2) .. floor((x + theta) / 2)
  const unsigned lo = (x - theta + 1) / 2;
  const unsigned hi = (x + theta) / 2;
  BigInt favourable = 0;
  for (unsigned i = lo; i <= hi; ++i) favourable += binom(x, i);
  BigInt total = 1;
  total <<= x;
  return Rational(favourable, total);
}

std::vector<std::pair<unsigned, unsigned>> monotonicity_violations(unsigned theta, unsigned x_max) {
  std::vector<std::pair<unsigned, unsigned>> out;
  for (unsigned x = theta + 1; x <= x_max; ++x) {
    if (!(prob_good_approx(x, theta) > prob_good_approx(x + 2, theta))) {
      out.emplace_back(x, theta);
    }
  }
  return out;
}

bool prob_monotonicity_check(unsigned theta, unsigned x_max) {
  return monotonicity_violations(theta, x_max).empty();
}

Rational grouping_gamma(unsigned k, unsigned l1, unsigned l2) {
  if (l1 > k || l2 > k) {
    throw std::invalid_argument("grouping_gamma: load factor out of [0, k]");
  }
  const unsigned l_max = std::max(l1, l2);
  const unsigned l_min = std::min(l1, l2);
  const BinomialTable binom(k);
  return Rational(binom(l_max, l_min) * binom(k, l_max), binom(k, l_max) * binom(k, l_min));
}

CounterVector apply_h1(const BitVector& r, std::span<const unsigned> group_of_query, unsigned b) {
  if (group_of_query.size() != r.size()) {
    throw std::invalid_argument("apply_h1: group map length must equal vector length");
  }
  CounterVector c(b, 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (group_of_query[i] >= b) throw std::invalid_argument("apply_h1: group id out of range");
    if (r[i]) ++c[group_of_query[i]];
  }
  return c;
}

std::uint64_t DistanceDistribution::pairs_at_hamming(unsigned x) const {
  std::uint64_t n = 0;
  for (const auto& [key, count] : counts) {
    if (key.first == x) n += count;
  }
  return n;
}

Rational DistanceDistribution::conditional_at_most(unsigned x, unsigned theta) const {
  std::uint64_t hit = 0;
  std::uint64_t all = 0;
  for (const auto& [key, count] : counts) {
    if (key.first != x) continue;
    all += count;
    if (key.second <= theta) hit += count;
  }
  if (all == 0) throw std::domain_error("conditional_at_most: no pairs at this distance");
  return Rational(BigInt(hit), BigInt(all));
}

bool DistanceDistribution::lower_bound_holds() const {
  return std::all_of(counts.begin(), counts.end(),
                     [](const auto& kv) { return kv.first.second <= kv.first.first; });
}

DistanceDistribution brute_force_h1_distribution(unsigned k, unsigned b,
                                                 std::span<const unsigned> group_of_query,
                                                 const EnumerationOptions& options) {
  if (k == 0 || b == 0) throw std::invalid_argument("brute_force_h1_distribution: k, b > 0");
  if (k > 63) throw std::invalid_argument("brute_force_h1_distribution: k must be < 64");
  if (group_of_query.size() != k) {
    throw std::invalid_argument("brute_force_h1_distribution: group map must have k entries");
  }
  if (!options.sample_pairs && k > kMaxExhaustiveK) {
    throw std::invalid_argument(
        "brute_force_h1_distribution: k too large for exhaustive enumeration; request sampling");
  }
  std::vector<std::uint64_t> group_masks(b, 0);
  for (unsigned q = 0; q < k; ++q) {
    if (group_of_query[q] >= b) {
      throw std::invalid_argument("brute_force_h1_distribution: group id out of range");
    }
    group_masks[group_of_query[q]] |= 1ULL << q;
  }

  DistanceDistribution dist;
  dist.k = k;
  dist.b = b;
  dist.exhaustive = !options.sample_pairs.has_value();

  // Flat (hamming, manhattan) table; folded into the map at the end.
  std::vector<std::uint64_t> table((k + 1) * (k + 1), 0);
  auto tally = [&](std::uint64_t r1, std::uint64_t r2) {
    const auto ham = static_cast<unsigned>(std::popcount(r1 ^ r2));
    unsigned man = 0;
    for (const auto m : group_masks) {
      const int c1 = std::popcount(r1 & m);
      const int c2 = std::popcount(r2 & m);
      man += static_cast<unsigned>(c1 > c2 ? c1 - c2 : c2 - c1);
    }
    ++table[ham * (k + 1) + man];
  };

  const std::uint64_t n_vectors = 1ULL << k;
  if (options.sample_pairs) {
    Rng rng(options.seed);
    for (std::uint64_t i = 0; i < *options.sample_pairs; ++i) {
      tally(rng.below(n_vectors), rng.below(n_vectors));
    }
    dist.total_pairs = *options.sample_pairs;
  } else {
    for (std::uint64_t r1 = 0; r1 < n_vectors; ++r1) {
      for (std::uint64_t r2 = 0; r2 < n_vectors; ++r2) tally(r1, r2);
    }
    dist.total_pairs = n_vectors * n_vectors;
  }
  for (unsigned h = 0; h <= k; ++h) {
    for (unsigned m = 0; m <= k; ++m) {
      if (const auto c = table[h * (k + 1) + m]; c != 0) dist.counts[{h, m}] = c;
    }
  }
  return dist;
}

std::pair<std::uint64_t, std::uint64_t> brute_force_gamma_counts(unsigned k, unsigned l1,
                                                                 unsigned l2) {
  if (k > kMaxExhaustiveK) throw std::invalid_argument("brute_force_gamma_counts: k too large");
  if (l1 > k || l2 > k) throw std::invalid_argument("brute_force_gamma_counts: load factor > k");
  std::vector<std::uint64_t> with_l1;
  std::vector<std::uint64_t> with_l2;
  for (std::uint64_t v = 0; v < (1ULL << k); ++v) {
    const auto pc = static_cast<unsigned>(std::popcount(v));
    if (pc == l1) with_l1.push_back(v);
    if (pc == l2) with_l2.push_back(v);
  }
  const unsigned expected = l1 > l2 ? l1 - l2 : l2 - l1;
  std::uint64_t matching = 0;
  for (const auto a : with_l1) {
    for (const auto c : with_l2) {
      if (static_cast<unsigned>(std::popcount(a ^ c)) == expected) ++matching;
    }
  }
  return {matching, static_cast<std::uint64_t>(with_l1.size()) * with_l2.size()};
}

double to_double(const Rational& r) { return static_cast<double>(r); }

}  // namespace tlsh
