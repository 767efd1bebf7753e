#include "tlsh/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "tlsh/random.hpp"
#include "tlsh/utilization_window.hpp"

namespace tlsh {

const char* sweep_name(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::kRecordsPerQuery: return "records_per_query";
    case SweepParam::kUniqueness: return "uniqueness_100";
    case SweepParam::kRecordCount: return "record_count";
    case SweepParam::kRecordSize: return "record_size";
    case SweepParam::kB: return "b";
  }
  return "unknown";
}

SweepParam parse_sweep(const std::string& s) {
  for (const auto p : {SweepParam::kRecordsPerQuery, SweepParam::kUniqueness,
                       SweepParam::kRecordCount, SweepParam::kRecordSize, SweepParam::kB}) {
    if (s == sweep_name(p)) return p;
  }
  throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

const char* hasher_name(HasherKind h) noexcept {
  switch (h) {
    case HasherKind::kTunable: return "tunable";
    case HasherKind::kTunableUnoptimized: return "tunable-unoptimized";
    case HasherKind::kBitSampling: return "bit-sampling";
    case HasherKind::kStatic: return "static";
  }
  return "unknown";
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace {

std::uint64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument(std::string("sweep value for ") + what +
                                " must be a positive integer");
  }
  return static_cast<std::uint64_t>(v);
}

void apply_sweep(SweepParam p, double v, WorkloadSpec& spec, unsigned& b) {
  switch (p) {
    case SweepParam::kRecordsPerQuery: spec.records_per_query = as_count(v, "records_per_query"); break;
    case SweepParam::kUniqueness: spec.uniqueness_100 = v; break;
    case SweepParam::kRecordCount: spec.record_count = as_count(v, "record_count"); break;
    case SweepParam::kRecordSize: spec.record_size = as_count(v, "record_size"); break;
    case SweepParam::kB: b = static_cast<unsigned>(as_count(v, "b")); break;
  }
}

std::uint64_t rep_seed(std::uint64_t base, unsigned rep) { return splitmix64(base + rep); }

}  // namespace

StoreRunResult run_store(const Trace& trace, const WorkloadSpec& spec, Placement placement,
                         const StoreRunOptions& o) {
  if (!(o.fill_factor > 0.0 && o.fill_factor <= 1.0)) {
    throw std::invalid_argument("run_store: fill factor must be in (0, 1]");
  }
  StoreConfig sc;
  sc.page_size = o.page_size;
  sc.record_size = spec.record_size;
  const std::uint64_t per_page = sc.records_per_page();
  if (per_page == 0) throw std::invalid_argument("run_store: record larger than a page");
  sc.num_pages = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(spec.record_count) / (static_cast<double>(per_page) * o.fill_factor)));
  sc.max_records = spec.record_count;
  sc.placement = placement;
  sc.k = o.k;
  sc.b = o.b;
  sc.mds = o.mds;
  sc.seed = o.seed;
  PagedStore store(sc);

  std::vector<std::byte> payload(spec.record_size);
  for (std::uint64_t key = 0; key < spec.record_count; ++key) {
    for (std::size_t i = 0; i < payload.size(); ++i) {
      payload[i] = static_cast<std::byte>((key * 131 + i) & 0xff);
    }
    store.put(key, payload);
  }

  std::uint64_t checksum = 0;
  for (const auto& q : trace.queries) {
    store.begin_query();
    for (const auto p : q.positions) {
      const auto rec = store.get(p);
      for (const auto byte : rec) checksum += static_cast<std::uint8_t>(byte);
    }
    store.end_query();
  }
  if (checksum == 0x5eed) std::fputs("", stderr);  // keeps the reads observable

  StoreRunResult r;
  r.placement = placement;
  const auto& m = store.metrics();
  std::uint64_t tail_n = 0;
  for (const auto& qm : m) {
    r.pages_touched += static_cast<double>(qm.pages_touched);
    r.moves += static_cast<double>(qm.moves);
    r.records_accessed += static_cast<double>(qm.records_accessed);
    r.fetch_ns += static_cast<double>(qm.fetch_ns);
    r.tune_ns += static_cast<double>(qm.tune_ns);
    if (qm.query_id >= o.measure_from) {
      r.pages_touched_tail += static_cast<double>(qm.pages_touched);
      ++tail_n;
    }
  }
  if (!m.empty()) {
    const auto n = static_cast<double>(m.size());
    r.pages_touched /= n;
    r.moves /= n;
    r.records_accessed /= n;
    r.fetch_ns /= n;
    r.tune_ns /= n;
  }
  if (tail_n > 0) r.pages_touched_tail /= static_cast<double>(tail_n);
  return r;
}

std::vector<StoreBenchRow> run_store_benchmark(const StoreBenchConfig& config) {
  if (config.values.empty()) throw std::invalid_argument("store bench: no sweep values");
  if (config.repetitions == 0) throw std::invalid_argument("store bench: repetitions must be > 0");
  std::vector<StoreBenchRow> rows;
  for (const double v : config.values) {
    WorkloadSpec spec = config.workload;
    StoreRunOptions run = config.run;
    apply_sweep(config.sweep, v, spec, run.b);
    spec.validate();
    std::vector<StoreRunResult> sums(config.placements.size());
    for (unsigned rep = 0; rep < config.repetitions; ++rep) {
      spec.seed = rep_seed(config.workload.seed, rep);
      const Trace trace = generate(spec);
      run.seed = spec.seed;
      for (std::size_t i = 0; i < config.placements.size(); ++i) {
        const auto r = run_store(trace, spec, config.placements[i], run);
        sums[i].pages_touched += r.pages_touched;
        sums[i].pages_touched_tail += r.pages_touched_tail;
        sums[i].moves += r.moves;
        sums[i].records_accessed += r.records_accessed;
        sums[i].fetch_ns += r.fetch_ns;
        sums[i].tune_ns += r.tune_ns;
      }
    }
    const auto n = static_cast<double>(config.repetitions);
    for (std::size_t i = 0; i < config.placements.size(); ++i) {
      StoreRunResult mean = sums[i];
      mean.placement = config.placements[i];
      mean.pages_touched /= n;
      mean.pages_touched_tail /= n;
      mean.moves /= n;
      mean.records_accessed /= n;
      mean.fetch_ns /= n;
      mean.tune_ns /= n;
      rows.push_back({v, config.placements[i], mean});
    }
  }
  return rows;
}

void write_store_csv(std::ostream& out, const StoreBenchConfig& config,
                     const std::vector<StoreBenchRow>& rows) {
  out << "experiment,parameter,value,store,repetitions,mean_records_accessed,"
         "mean_pages_touched,mean_pages_touched_after_warmup,mean_moves\n";
  for (const auto& r : rows) {
    out << config.experiment << ',' << sweep_name(config.sweep) << ',' << format_fixed(r.value, 3)
        << ',' << placement_name(r.placement) << ',' << config.repetitions << ','
        << format_fixed(r.mean.records_accessed, 3) << ',' << format_fixed(r.mean.pages_touched, 3)
        << ',' << format_fixed(r.mean.pages_touched_tail, 3) << ',' << format_fixed(r.mean.moves, 3)
        << '\n';
  }
}

void write_store_timing_csv(std::ostream& out, const StoreBenchConfig& config,
                            const std::vector<StoreBenchRow>& rows) {
  out << "experiment,parameter,value,store,mean_query_ns,mean_fetch_ns,mean_tune_ns,tune_fraction\n";
  for (const auto& r : rows) {
    const double total = r.mean.fetch_ns + r.mean.tune_ns;
    out << config.experiment << ',' << sweep_name(config.sweep) << ',' << format_fixed(r.value, 3)
        << ',' << placement_name(r.placement) << ',' << format_fixed(total, 0) << ','
        << format_fixed(r.mean.fetch_ns, 0) << ',' << format_fixed(r.mean.tune_ns, 0) << ','
        << format_fixed(total > 0 ? r.mean.tune_ns / total : 0.0, 4) << '\n';
  }
}

double AccuracyCounts::probability(HasherKind h) const {
  if (near_pairs == 0) return 0.0;
  return static_cast<double>(near_and_close[static_cast<int>(h)]) /
         static_cast<double>(near_pairs);
}

AccuracyCounts measure_accuracy(const Trace& trace, std::uint64_t record_count,
                                const AccuracyOptions& o) {
  LshConfig lc;
  lc.k = o.k;
  lc.b = o.b;
  lc.epsilon = o.epsilon;
  lc.omega = record_count;
  lc.seed = o.seed;
  MdsConfig mds = o.mds;
  mds.seed = o.seed;
  TunableLsh tunable(lc, mds);
  TunableLsh unoptimized(lc, std::make_unique<RoundRobinGrouping>(o.b));
  UtilizationWindow window(o.k, record_count);
  const auto sampled = draw_sample_positions(o.k, o.b, o.seed);

  // records accessed within the last k queries
  std::vector<std::uint32_t> in_window(record_count, 0);
  std::vector<std::uint32_t> active;
  std::vector<std::uint32_t> index_of(record_count, 0);
  std::deque<const QueryAccess*> recent;

  Rng rng(splitmix64(o.seed ^ 0xacc));
  AccuracyCounts counts;
  const double hash_span = o.epsilon > 1 ? static_cast<double>(o.epsilon - 1) : 1.0;

  for (const auto& q : trace.queries) {
    tunable.tune(q);
    unoptimized.tune(q);
    window.record(q);
    recent.push_back(&q);
    for (const auto p : q.positions) {
      if (in_window[p]++ == 0) {
        index_of[p] = static_cast<std::uint32_t>(active.size());
        active.push_back(p);
      }
    }
    if (recent.size() > o.k) {
      for (const auto p : recent.front()->positions) {
        if (--in_window[p] == 0) {
          const std::uint32_t last = active.back();
          active[index_of[p]] = last;
          index_of[last] = index_of[p];
          active.pop_back();
        }
      }
      recent.pop_front();
    }
    if (q.t + 1 < o.k || active.size() < 2) continue;

    for (unsigned s = 0; s < o.pairs_per_query; ++s) {
      const auto i = rng.below(active.size());
      auto j = rng.below(active.size() - 1);
      if (j >= i) ++j;
      const std::uint32_t a = active[i];
      const std::uint32_t c = active[j];
      const std::uint64_t ma = window.mask(a);
      const std::uint64_t mc = window.mask(c);
      const double delta = static_cast<double>(std::popcount(ma ^ mc)) / o.k;
      if (delta > o.x) continue;
      ++counts.near_pairs;
      auto close = [&](std::uint64_t ha, std::uint64_t hc) {
        const double d = static_cast<double>(ha > hc ? ha - hc : hc - ha) / hash_span;
        return d <= o.theta;
      };
      counts.near_and_close[0] += close(tunable.hash(a), tunable.hash(c));
      counts.near_and_close[1] += close(unoptimized.hash(a), unoptimized.hash(c));
      counts.near_and_close[2] += close(bit_sampling_hash(ma, sampled, o.epsilon),
                                        bit_sampling_hash(mc, sampled, o.epsilon));
      counts.near_and_close[3] += close(static_hash(a, o.epsilon, o.seed),
                                        static_hash(c, o.epsilon, o.seed));
    }
  }
  return counts;
}

std::vector<AccuracyRow> run_lsh_sensitivity(const LshBenchConfig& config) {
  if (config.values.empty()) throw std::invalid_argument("lsh bench: no sweep values");
  if (config.repetitions == 0) throw std::invalid_argument("lsh bench: repetitions must be > 0");
  std::vector<AccuracyRow> rows;
  constexpr HasherKind kinds[] = {HasherKind::kTunable, HasherKind::kTunableUnoptimized,
                                  HasherKind::kBitSampling, HasherKind::kStatic};
  for (const double v : config.values) {
    WorkloadSpec spec = config.workload;
    AccuracyOptions acc = config.accuracy;
    apply_sweep(config.sweep, v, spec, acc.b);
    spec.validate();
    double prob[4] = {0, 0, 0, 0};
    std::uint64_t near = 0;
    for (unsigned rep = 0; rep < config.repetitions; ++rep) {
      spec.seed = rep_seed(config.workload.seed, rep);
      acc.seed = spec.seed;
      const auto counts = measure_accuracy(generate(spec), spec.record_count, acc);
      for (int h = 0; h < 4; ++h) prob[h] += counts.probability(kinds[h]);
      near += counts.near_pairs;
    }
    for (int h = 0; h < 4; ++h) {
      rows.push_back({v, kinds[h], prob[h] / config.repetitions, acc.theta, acc.x, near});
    }
  }
  return rows;
}

void write_accuracy_csv(std::ostream& out, const LshBenchConfig& config,
                        const std::vector<AccuracyRow>& rows) {
  out << "parameter,value,hasher,probability,theta,x,near_pairs\n";
  for (const auto& r : rows) {
    out << sweep_name(config.sweep) << ',' << format_fixed(r.value, 3) << ','
        << hasher_name(r.hasher) << ',' << format_fixed(r.probability, 6) << ','
        << format_fixed(r.theta, 3) << ',' << format_fixed(r.x, 3) << ',' << r.near_pairs << '\n';
  }
}

}  // namespace tlsh
