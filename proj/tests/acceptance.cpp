// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-tlsh-cli> [criterion...]

#include <algorithm>
#include <random>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tlsh/bench.hpp"
#include "tlsh/core_model.hpp"
#include "tlsh/kv_store.hpp"
#include "tlsh/minhash.hpp"
#include "tlsh/mds_tuner.hpp"
#include "tlsh/oracle.hpp"
#include "tlsh/random.hpp"
#include "tlsh/tunable_lsh.hpp"
#include "tlsh/workload.hpp"

using namespace tlsh;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kRuntimeLimitSeconds = 60.0;
constexpr double kAccuracyMargin = 0.05;
constexpr double kPagesRatioLimit = 0.7;
constexpr double kSlopeConfidence = 0.95;
constexpr std::uint64_t kPropertyCases = 10000;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }

// 1: counter distance never exceeds Hamming distance.
Verdict lower_bound() {
  const auto start = Clock::now();
  constexpr unsigned k = 10;
  std::uint64_t pairs = 0, maps = 0;
  Verdict v;
  for (const unsigned b : {1U, 2U, 5U}) {
    for (std::uint64_t m = 0; m < 50; ++m) {
      const auto f = random_balanced_map(k, b, 1000 * b + m);
      const auto d = brute_force_h1_distribution(k, b, f);
      pairs += d.total_pairs;
      ++maps;
      if (!d.lower_bound_holds()) {
        v.pass = false;
        v.detail = "violated for b=" + std::to_string(b) + " map " + std::to_string(m) + "; ";
      }
    }
  }
  const double secs = seconds_since(start);
  if (secs >= kRuntimeLimitSeconds) v.pass = false;
  v.detail += "maps=" + std::to_string(maps) + " pairs=" + std::to_string(pairs) + " runtime_s=" + fmt(secs, 2);
  return v;
}

// 2: enumeration at b = 1 matches the closed form exactly.
Verdict exactness() {
  const auto start = Clock::now();
  constexpr unsigned k = 12;
  const std::vector<unsigned> one(k, 0);
  const auto d = brute_force_h1_distribution(k, 1, one);
  Verdict v;
  unsigned cases = 0;
  for (unsigned x = 1; x <= k; ++x) {
    for (unsigned theta = 0; theta < x; ++theta) {
      ++cases;
      if (d.conditional_at_most(x, theta) != prob_good_approx(x, theta)) {
        v.pass = false;
        v.detail += "mismatch x=" + std::to_string(x) + " theta=" + std::to_string(theta) + "; ";
      }
    }
  }
  const double secs = seconds_since(start);
  if (secs >= kRuntimeLimitSeconds) v.pass = false;
  v.detail += "cases=" + std::to_string(cases) + " runtime_s=" + fmt(secs, 2);
  return v;
}

// 3: strict decrease from x to x + 2 for every theta < x <= 18.
Verdict monotonicity() {
  Verdict v;
  std::vector<std::pair<unsigned, unsigned>> bad;
  unsigned cases = 0;
  for (unsigned theta = 0; theta < 18; ++theta) {
    for (unsigned x = theta + 1; x <= 18; ++x) ++cases;
    for (const auto& p : monotonicity_violations(theta, 18)) bad.push_back(p);
  }
  v.pass = bad.empty();
  v.detail = "cases=" + std::to_string(cases) + " violations=" + std::to_string(bad.size());
  if (!bad.empty()) {
    v.detail += " at (x,theta):";
    for (const auto& [x, theta] : bad) {
      v.detail += " (" + std::to_string(x) + "," + std::to_string(theta) + ")";
    }
    const auto& [x0, t0] = bad.front();
    v.detail += " e.g. P(" + std::to_string(x0) + "," + std::to_string(t0) + ")=" +
                prob_good_approx(x0, t0).str() + " P(" + std::to_string(x0 + 2) + "," +
                std::to_string(t0) + ")=" + prob_good_approx(x0 + 2, t0).str();
  }
  return v;
}

// 4: grouping gamma by enumeration plus spot values.
Verdict gamma_check() {
  Verdict v;
  unsigned cases = 0;
  for (unsigned k = 1; k <= 10; ++k) {
    for (unsigned l1 = 0; l1 <= k; ++l1) {
      for (unsigned l2 = 0; l2 <= k; ++l2) {
        ++cases;
        const auto [hit, total] = brute_force_gamma_counts(k, l1, l2);
        if (Rational(BigInt(hit), BigInt(total)) != grouping_gamma(k, l1, l2)) {
          v.pass = false;
          v.detail += "mismatch k=" + std::to_string(k) + " l1=" + std::to_string(l1) +
                      " l2=" + std::to_string(l2) + "; ";
        }
      }
    }
  }
  const bool spots = grouping_gamma(12, 0, 0) == 1 && grouping_gamma(12, 2, 1) == Rational(1, 6);
  v.pass = v.pass && spots;
  v.detail += "cases=" + std::to_string(cases) + " gamma(12,0,0)=" + grouping_gamma(12, 0, 0).str() +
              " gamma(12,2,1)=" + grouping_gamma(12, 2, 1).str();
  return v;
}

// 5: a single access stays visible for at least k and at most 2k later queries.
Verdict retention() {
  Verdict v;
  for (const unsigned k : {24U, 96U}) {
    for (const unsigned b : {3U, 8U}) {
      LshConfig c;
      c.k = k;
      c.b = b;
      c.omega = 8;
      c.epsilon = 1 << 20;
      const unsigned cycle = 2 * b * c.period();
      std::uint64_t lo = UINT64_MAX, hi = 0;
      bool gap = false;
      for (std::uint64_t phase = 0; phase < cycle; ++phase) {
        const std::uint64_t t0 = 2 * k + phase;
        TunableLsh lsh(c, MdsConfig{.seed = phase});
        Rng rng(phase);
        std::uint64_t last_visible = 0;
        bool seen_gap = false, invisible = false;
        for (std::uint64_t t = 0; t <= t0 + 3 * k; ++t) {
          std::vector<std::uint32_t> p{1 + static_cast<std::uint32_t>(rng.below(7))};
          if (t == t0) p.push_back(0);
          lsh.tune(QueryAccess::make(t, p));
          if (t < t0) continue;
          const auto counts = lsh.counters(0);
          const bool visible = std::accumulate(counts.begin(), counts.end(), 0U) > 0;
          if (visible) {
            if (invisible) seen_gap = true;
            last_visible = t;
          } else {
            invisible = true;
          }
        }
        const std::uint64_t kept = last_visible - t0;  // later queries still seeing it
        lo = std::min(lo, kept);
        hi = std::max(hi, kept);
        gap = gap || seen_gap;
      }
      const bool ok = lo >= k && hi <= 2ULL * k && !gap;
      v.pass = v.pass && ok;
      v.detail += "k=" + std::to_string(k) + ",b=" + std::to_string(b) + ":[" + std::to_string(lo) + "," +
                  std::to_string(hi) + "]" + (gap ? "gap" : "") + " ";
    }
  }
  return v;
}

// 6: per-record tune latency does not grow with the record capacity.
Verdict constant_time() {
  const std::vector<std::uint64_t> omegas{1000, 10000, 100000, 1000000};
  constexpr unsigned kReps = 8;
  constexpr std::uint64_t kWorkingSet = 500, kPerQuery = 250, kWarmup = 100, kTimed = 400;
  std::vector<double> xs, ys;
  std::map<std::uint64_t, double> mean;
  for (unsigned rep = 0; rep < kReps; ++rep) {
    // shuffled so drift over the run is not confounded with omega
    auto order = omegas;
    std::shuffle(order.begin(), order.end(), std::mt19937_64(rep));
    for (const auto omega : order) {
      LshConfig c;
      c.omega = omega;
      c.epsilon = 1 << 16;
      TunableLsh lsh(c, MdsConfig{.seed = rep});
      // fixed-size working set spread over the whole id range
      const std::uint64_t stride = omega / kWorkingSet;
      Rng rng(rep);
      std::vector<QueryAccess> queries;
      for (std::uint64_t t = 0; t < kWarmup + kTimed; ++t) {
        std::vector<std::uint32_t> p;
        for (std::uint64_t i = 0; i < kPerQuery; ++i) {
          p.push_back(static_cast<std::uint32_t>(rng.below(kWorkingSet) * stride));
        }
        queries.push_back(QueryAccess::make(t, p));
      }
      std::uint64_t records = 0;
      for (std::uint64_t t = 0; t < kWarmup; ++t) lsh.tune(queries[t]);
      const auto start = Clock::now();
      for (std::uint64_t t = kWarmup; t < queries.size(); ++t) {
        lsh.tune(queries[t]);
        records += queries[t].positions.size();
      }
      const double ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count() /
                        static_cast<double>(records);
      xs.push_back(static_cast<double>(omega));
      ys.push_back(ns);
      mean[omega] += ns / kReps;
    }
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  const boost::math::students_t t_dist(n - 2);
  const double tq = boost::math::quantile(t_dist, 0.5 + kSlopeConfidence / 2);
  const double lo = slope - tq * se, hi = slope + tq * se;
  Verdict v;
  v.pass = lo <= 0.0 && 0.0 <= hi;
  v.detail = "ns_per_record:";
  for (const auto& [omega, m] : mean) v.detail += " omega=" + std::to_string(omega) + ":" + fmt(m, 1);
  std::ostringstream ci;
  ci << " slope_ns_per_record_per_omega=" << slope << " ci95=[" << lo << "," << hi << "]";
  v.detail += ci.str();
  return v;
}

// 7: accuracy ordering on near pairs.
Verdict accuracy() {
  WorkloadSpec w;
  w.record_count = 20000;
  w.records_per_query = 400;
  w.num_queries = 600;
  AccuracyOptions o;  // theta 0.2, x 0.1
  constexpr unsigned kSeeds = 20;
  Verdict v;
  std::map<double, std::array<double, 4>> p;
  for (const double u : {1.0, 10.0, 25.0, 100.0}) {
    std::array<double, 4> sum{};
    for (unsigned s = 0; s < kSeeds; ++s) {
      w.uniqueness_100 = u;
      w.seed = splitmix64(s);
      o.seed = w.seed;
      const auto counts = measure_accuracy(generate(w), w.record_count, o);
      for (int h = 0; h < 4; ++h) sum[h] += counts.probability(static_cast<HasherKind>(h));
    }
    for (auto& x : sum) x /= kSeeds;
    p[u] = sum;
    const double vs_bits = sum[0] - sum[2], vs_unopt = sum[0] - sum[1];
    const bool scored = u <= 25.0;
    const bool ok = vs_bits >= kAccuracyMargin && vs_unopt >= kAccuracyMargin;
    if (scored) v.pass = v.pass && ok;
    v.detail += "U=" + fmt(u, 0) + (scored ? "" : "(info)") + ": tunable=" + fmt(sum[0]) +
                " unopt=" + fmt(sum[1]) + " bits=" + fmt(sum[2]) + " static=" + fmt(sum[3]) +
                " margin_bits=" + fmt(vs_bits) + " margin_unopt=" + fmt(vs_unopt) + "; ";
  }
  return v;
}

// 8: pages touched after warm-up and tune share versus records per query.
Verdict clustering() {
  Verdict v;
  WorkloadSpec w;  // 3000 queries, 1e5 records of 128 bytes
  StoreRunOptions o;
  o.measure_from = 1500;
  for (const double u : {10.0, 20.0}) {
    for (const std::uint64_t rpq : {2000ULL, 4000ULL}) {
      w.uniqueness_100 = u;
      w.records_per_query = rpq;
      w.seed = 7;
      o.seed = w.seed;
      const auto trace = generate(w);
      const auto tuned = run_store(trace, w, Placement::kTunable, o);
      const auto fixed = run_store(trace, w, Placement::kStatic, o);
      const double ratio = tuned.pages_touched_tail / fixed.pages_touched_tail;
      v.pass = v.pass && ratio <= kPagesRatioLimit;
      v.detail += "U=" + fmt(u, 0) + ",rpq=" + std::to_string(rpq) + ": pages " +
                  fmt(tuned.pages_touched_tail, 1) + "/" + fmt(fixed.pages_touched_tail, 1) +
                  " ratio=" + fmt(ratio, 3) + "; ";
    }
  }
  // tune share at increasing load, averaged over two traces
  std::vector<double> share;
  v.detail += "tune_fraction:";
  for (const std::uint64_t rpq : {500ULL, 1000ULL, 2000ULL, 4000ULL}) {
    double tune = 0, total = 0;
    for (const std::uint64_t seed : {11ULL, 12ULL}) {
      w.uniqueness_100 = 10;
      w.records_per_query = rpq;
      w.seed = seed;
      o.seed = seed;
      const auto r = run_store(generate(w), w, Placement::kTunable, o);
      tune += r.tune_ns;
      total += r.tune_ns + r.fetch_ns;
    }
    share.push_back(tune / total);
    v.detail += " rpq=" + std::to_string(rpq) + ":" + fmt(share.back(), 3);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < share.size(); ++i) decreasing = decreasing && share[i] < share[i - 1];
  v.pass = v.pass && decreasing;
  v.detail += decreasing ? " (decreasing)" : " (not decreasing)";
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9: repeated CLI runs produce identical output files.
Verdict determinism(const std::string& cli) {
  Verdict v;
  if (cli.empty()) {
    v.pass = false;
    v.detail = "no CLI path given";
    return v;
  }
  const auto dir = std::filesystem::temp_directory_path() / "tlsh_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"generate", "generate --num_queries 200 --record_count 5000 --records_per_query 100 --seed 5 --out "},
      {"store", "store-bench --num_queries 150 --record_count 5000 --values 100,300 --repetitions 2 "
                "--measure_from 50 --seed 5 --out "},
      {"lsh", "lsh-bench --num_queries 150 --record_count 5000 --records_per_query 100 --values 1,25 "
              "--repetitions 2 --seed 5 --out "},
  };
  unsigned files = 0;
  for (const auto& [name, args] : runs) {
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
      const auto path = dir / (name + std::to_string(i) + ".out");
      std::filesystem::remove(path);
      const std::string cmd = "\"" + cli + "\" " + args + "\"" + path.string() + "\"";
      if (std::system(cmd.c_str()) != 0) {
        v.pass = false;
        v.detail += name + ": command failed; ";
      }
      outputs[i] = slurp(path);
    }
    ++files;
    if (outputs[0].empty() || outputs[0] != outputs[1]) {
      v.pass = false;
      v.detail += name + ": outputs differ; ";
    }
  }
  for (int i = 0; i < 2; ++i) {
    const auto path = dir / ("oracle" + std::to_string(i) + ".out");
    const std::string cmd = "\"" + cli + "\" oracle > \"" + path.string() + "\"";
    if (std::system(cmd.c_str()) != 0) v.pass = false;
  }
  ++files;
  if (slurp(dir / "oracle0.out") != slurp(dir / "oracle1.out")) {
    v.pass = false;
    v.detail += "oracle: outputs differ; ";
  }
  std::filesystem::remove_all(dir);
  v.detail += "commands=" + std::to_string(files) + " each run twice";
  return v;
}

std::vector<std::byte> payload_of(std::uint64_t key, std::size_t size) {
  std::vector<std::byte> p(size);
  for (std::size_t i = 0; i < size; ++i) p[i] = static_cast<std::byte>(splitmix64(key * 131 + i) & 0xff);
  return p;
}

// A small random store driven through random puts and queries.
struct StoreCase {
  PagedStore store;
  std::vector<std::uint64_t> keys;

  static StoreConfig config(Rng& rng) {
    StoreConfig c;
    c.record_size = 8 << rng.below(3);
    c.page_size = c.record_size * (1 + rng.below(6));
    c.num_pages = 1 + rng.below(12);
    const Placement kinds[] = {Placement::kTunable, Placement::kTunableRoundRobin, Placement::kBitSampling,
                               Placement::kStatic};
    c.placement = kinds[rng.below(4)];
    c.k = 4 + static_cast<unsigned>(rng.below(8));
    c.b = 1 + static_cast<unsigned>(rng.below(c.k));
    c.seed = rng.next();
    if (rng.bernoulli(0.3)) c.move_budget = rng.below(4);
    return c;
  }

  explicit StoreCase(Rng& rng) : store(config(rng)) {}

  void fill(Rng& rng) {
    const std::uint64_t cap = store.config().record_capacity();
    const std::uint64_t n = 1 + rng.below(cap);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t key = rng.below(1000);
      store.put(key, payload_of(key, store.config().record_size));
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
  }

  void query(Rng& rng) {
    store.begin_query();
    const std::uint64_t n = rng.below(keys.size() + 1);
    for (std::uint64_t i = 0; i < n; ++i) (void)store.get(keys[rng.below(keys.size())]);
    store.end_query();
  }
};

Verdict property_suites() {
  Verdict v;
  Rng rng(2024);
  std::map<std::string, std::uint64_t> passed;
  auto record = [&](const std::string& name, bool ok) {
    if (ok) {
      ++passed[name];
    } else if (v.pass) {
      v.pass = false;
      v.detail += name + " failed; ";
    }
  };

  for (std::uint64_t c = 0; c < kPropertyCases; ++c) {
    StoreCase s(rng);
    s.fill(rng);
    bool ok = true;
    for (int q = 0; q < 8 && ok; ++q) {
      s.query(rng);
      try {
        s.store.check_integrity();
      } catch (const std::logic_error&) {
        ok = false;
      }
    }
    record("directory_integrity", ok);
  }

  for (std::uint64_t c = 0; c < kPropertyCases; ++c) {
    StoreCase s(rng);
    s.fill(rng);
    bool ok = true;
    // fill to capacity, then one more insert must be refused
    const std::uint64_t cap = s.store.config().record_capacity();
    for (std::uint64_t key = 1000; s.store.size() < cap; ++key) {
      s.store.put(key, payload_of(key, s.store.config().record_size));
      s.keys.push_back(key);
    }
    try {
      s.store.put(999999, payload_of(0, s.store.config().record_size));
      ok = false;
    } catch (const CapacityError&) {
    }
    for (int q = 0; q < 4; ++q) s.query(rng);
    const std::uint64_t per_page = s.store.config().records_per_page();
    for (std::uint64_t p = 0; p < s.store.num_pages(); ++p) ok = ok && s.store.page_fill(p) <= per_page;
    record("page_capacity", ok);
  }

  for (std::uint64_t c = 0; c < kPropertyCases; ++c) {
    StoreCase s(rng);
    s.fill(rng);
    const auto before = s.store.contents();
    for (int q = 0; q < 8; ++q) s.query(rng);
    record("relocation_preserves_content", s.store.contents() == before);
  }

  for (std::uint64_t c = 0; c < kPropertyCases; ++c) {
    std::vector<std::uint32_t> set(1 + rng.below(40));
    for (auto& x : set) x = static_cast<std::uint32_t>(rng.below(1u << 20));
    const std::uint64_t seed = rng.next();
    const auto ref = minhash(std::span<const std::uint32_t>(set), seed);
    for (std::size_t i = set.size(); i > 1; --i) std::swap(set[i - 1], set[rng.below(i)]);
    record("minhash_permutation_invariance", minhash(std::span<const std::uint32_t>(set), seed) == ref);
  }

  for (std::uint64_t c = 0; c < kPropertyCases; ++c) {
    MdsConfig cfg;
    cfg.k = 2 + static_cast<unsigned>(rng.below(30));
    cfg.b = 1 + static_cast<unsigned>(rng.below(cfg.k));
    cfg.seed = rng.next();
    MdsTuner tuner(cfg);
    bool ok = true;
    const std::uint64_t steps = cfg.k + rng.below(2 * cfg.k);
    for (std::uint64_t t = 0; t < steps && ok; ++t) {
      std::vector<std::uint32_t> p;
      const auto lo = static_cast<std::uint32_t>(rng.below(20));
      for (std::uint32_t i = 0; i <= rng.below(5); ++i) p.push_back(lo + i);
      tuner.reconfigure(QueryAccess::make(t, p));
      std::map<unsigned, unsigned> sizes;
      const std::uint64_t first = t + 1 >= cfg.k ? t + 1 - cfg.k : 0;
      for (std::uint64_t u = first; u <= t; ++u) ++sizes[tuner.f(u)];
      for (const auto& [g, n] : sizes) ok = ok && g < cfg.b && n <= cfg.group_capacity();
    }
    record("group_size_bound", ok);
  }

  for (const auto& [name, n] : passed) v.detail += name + "=" + std::to_string(n) + " ";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"counter_distance_lower_bound", lower_bound},
      {"good_approx_exact", exactness},
      {"good_approx_monotone", monotonicity},
      {"grouping_gamma", gamma_check},
      {"retention_window", retention},
      {"constant_time_tune", constant_time},
      {"accuracy_ordering", accuracy},
      {"self_clustering_benefit", clustering},
      {"cli_determinism", [&] { return determinism(cli); }},
      {"property_suites", property_suites},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion=" << id << " name=" << criteria[i].first << " status=" << (v.pass ? "PASS" : "FAIL")
              << " seconds=" << fmt(seconds_since(start), 1) << " detail=\"" << v.detail << "\"" << std::endl;
  }
  std::cout << "acceptance summary: " << (failed == 0 ? "PASS" : "FAIL") << " failed=" << failed << std::endl;
  return failed == 0 ? 0 : 1;
}
