#pragma once

// Experiment drivers behind the CLI: replaying generated traces against the
// paged store variants, and measuring how often each hasher keeps records
// with similar utilization vectors close together.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlsh/kv_store.hpp"
#include "tlsh/mds_tuner.hpp"
#include "tlsh/tunable_lsh.hpp"
#include "tlsh/workload.hpp"

namespace tlsh {

/// Store/workload knob a sweep varies.
enum class SweepParam { kRecordsPerQuery, kUniqueness, kRecordCount, kRecordSize, kB };

const char* sweep_name(SweepParam p) noexcept;
SweepParam parse_sweep(const std::string& s);

struct StoreRunResult {
  Placement placement{};
  double pages_touched = 0;       ///< mean over all queries
  double pages_touched_tail = 0;  ///< mean over queries >= measure_from
  double moves = 0;
  double records_accessed = 0;
  double fetch_ns = 0;
  double tune_ns = 0;
};

struct StoreRunOptions {
  std::uint64_t page_size = 4096;
  /// Fraction of slots occupied once every record is loaded.
  double fill_factor = 0.5;
  unsigned k = 24;
  unsigned b = 8;
  MdsConfig mds{};
  std::uint64_t measure_from = 1500;
  std::uint64_t seed = 0;
};

/// Loads every record of `spec` into a store with the given placement and
/// replays `trace` against it.
StoreRunResult run_store(const Trace& trace, const WorkloadSpec& spec, Placement placement,
                         const StoreRunOptions& options);

struct StoreBenchConfig {
  std::string experiment = "store";
  SweepParam sweep = SweepParam::kRecordsPerQuery;
  std::vector<double> values;
  WorkloadSpec workload{};
  StoreRunOptions run{};
  unsigned repetitions = 20;
  std::vector<Placement> placements{Placement::kTunable, Placement::kStatic,
                                    Placement::kBitSampling};
};

struct StoreBenchRow {
  double value = 0;
  Placement placement{};
  StoreRunResult mean{};
};

std::vector<StoreBenchRow> run_store_benchmark(const StoreBenchConfig& config);

/// Deterministic columns only (no timings).
void write_store_csv(std::ostream& out, const StoreBenchConfig& config,
                     const std::vector<StoreBenchRow>& rows);
void write_store_timing_csv(std::ostream& out, const StoreBenchConfig& config,
                            const std::vector<StoreBenchRow>& rows);

enum class HasherKind { kTunable, kTunableUnoptimized, kBitSampling, kStatic };
const char* hasher_name(HasherKind h) noexcept;

struct AccuracyOptions {
  unsigned k = 24;
  unsigned b = 8;
  std::uint64_t epsilon = 1ULL << 16;
  MdsConfig mds{};
  double theta = 0.2;       ///< normalized hash-distance threshold
  double x = 0.1;           ///< normalized utilization-distance threshold
  unsigned pairs_per_query = 200;
  std::uint64_t seed = 0;
};

struct AccuracyCounts {
  std::uint64_t near_pairs = 0;
  std::uint64_t near_and_close[4] = {0, 0, 0, 0};
  double probability(HasherKind h) const;
};

/// Replays `trace` through all four hashers. After each of the first k
/// queries has been seen, samples record pairs among records accessed in the
/// last k queries and counts pairs with normalized Hamming distance <= x and,
/// among those, pairs whose normalized hash distance is <= theta.
AccuracyCounts measure_accuracy(const Trace& trace, std::uint64_t record_count,
                                const AccuracyOptions& options);

struct LshBenchConfig {
  SweepParam sweep = SweepParam::kUniqueness;
  std::vector<double> values;
  WorkloadSpec workload{};
  AccuracyOptions accuracy{};
  unsigned repetitions = 20;
};

/// One row per (swept value, hasher); probability averaged over repetitions.
struct AccuracyRow {
  double value = 0;
  HasherKind hasher{};
  double probability = 0;
  double theta = 0;
  double x = 0;
  std::uint64_t near_pairs = 0;
};

std::vector<AccuracyRow> run_lsh_sensitivity(const LshBenchConfig& config);
void write_accuracy_csv(std::ostream& out, const LshBenchConfig& config,
                        const std::vector<AccuracyRow>& rows);

/// Fixed-point rendering used in every CSV so output is byte-stable.
std::string format_fixed(double v, int digits = 6);

}  // namespace tlsh
