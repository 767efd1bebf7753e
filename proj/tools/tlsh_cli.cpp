// tlsh: workload generation, store and hasher benchmarks, oracle checks.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tlsh/bench.hpp"
#include "tlsh/oracle.hpp"
#include "tlsh/workload.hpp"

namespace {

struct WorkloadFlags {
  tlsh::WorkloadSpec spec;
  std::string access_mode = "random";

  void add(CLI::App& app) {
    app.add_option("--num_queries", spec.num_queries, "queries in the trace")->capture_default_str();
    app.add_option("--record_count", spec.record_count, "records (omega)")->capture_default_str();
    app.add_option("--record_size", spec.record_size, "bytes per record")->capture_default_str();
    app.add_option("--records_per_query", spec.records_per_query)->capture_default_str();
    app.add_option("--uniqueness_100", spec.uniqueness_100,
                   "distinct templates per 100 queries, in [1, 100]")
        ->capture_default_str();
    app.add_option("--access_mode", access_mode)
        ->check(CLI::IsMember({"random", "sequential"}))
        ->capture_default_str();
    app.add_option("--jitter", spec.jitter, "fraction of a template resampled per query")
        ->capture_default_str();
    app.add_option("--seed", spec.seed)->capture_default_str();
  }

  tlsh::WorkloadSpec resolve() {
    spec.access_mode = tlsh::parse_access_mode(access_mode);
    return spec;
  }
};

void add_mds_flags(CLI::App& app, tlsh::MdsConfig& mds) {
  app.add_option("--sample_capacity", mds.sample_capacity)->capture_default_str();
  app.add_option("--neighbor_capacity", mds.neighbor_capacity)->capture_default_str();
  app.add_option("--decay", mds.decay)->capture_default_str();
}

tlsh::Placement parse_placement(const std::string& s) {
  for (const auto p : {tlsh::Placement::kTunable, tlsh::Placement::kTunableRoundRobin,
                       tlsh::Placement::kBitSampling, tlsh::Placement::kStatic}) {
    if (s == tlsh::placement_name(p)) return p;
  }
  throw std::invalid_argument("unknown store '" + s + "'");
}

// Writes to `path`, or stdout for "-".
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workload-adaptive locality-sensitive hashing toolkit"};
  app.set_config("--config", "", "key=value file with option defaults");
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic query trace");
  WorkloadFlags gen_flags;
  gen_flags.add(*gen);
  std::string gen_out = "trace.txt";
  gen->add_option("--out", gen_out, "trace path")->capture_default_str();

  // store-bench
  auto* store = app.add_subcommand("store-bench", "replay traces against the paged store variants");
  WorkloadFlags store_flags;
  store_flags.add(*store);
  tlsh::StoreBenchConfig store_cfg;
  std::string store_sweep = "records_per_query";
  std::vector<double> store_values = {500, 1000, 2000, 4000};
  std::vector<std::string> store_names = {"self-clustering", "static", "bit-sampling"};
  std::string store_out = "-";
  std::string store_timings;
  store->add_option("--experiment", store_cfg.experiment)->capture_default_str();
  store->add_option("--sweep", store_sweep)->capture_default_str();
  store->add_option("--values", store_values, "comma-separated sweep values")
      ->delimiter(',')
      ->capture_default_str();
  store->add_option("--repetitions", store_cfg.repetitions)->capture_default_str();
  store->add_option("--stores", store_names)->delimiter(',')->capture_default_str();
  store->add_option("--page_size", store_cfg.run.page_size)->capture_default_str();
  store->add_option("--fill_factor", store_cfg.run.fill_factor)->capture_default_str();
  store->add_option("--k", store_cfg.run.k)->capture_default_str();
  store->add_option("--b", store_cfg.run.b)->capture_default_str();
  store->add_option("--measure_from", store_cfg.run.measure_from)->capture_default_str();
  add_mds_flags(*store, store_cfg.run.mds);
  store->add_option("--out", store_out, "CSV path, - for stdout")->capture_default_str();
  store->add_option("--timings", store_timings, "also write fetch/tune timings to this CSV");

  // lsh-bench
  auto* lsh = app.add_subcommand("lsh-bench", "measure hasher accuracy on record pairs");
  WorkloadFlags lsh_flags;
  lsh_flags.spec.record_count = 20000;
  lsh_flags.spec.records_per_query = 400;
  lsh_flags.spec.num_queries = 600;
  lsh_flags.add(*lsh);
  tlsh::LshBenchConfig lsh_cfg;
  std::string lsh_sweep = "uniqueness_100";
  std::vector<double> lsh_values = {1, 10, 25, 50, 100};
  std::string lsh_out = "-";
  lsh->add_option("--sweep", lsh_sweep)->capture_default_str();
  lsh->add_option("--values", lsh_values, "comma-separated sweep values")
      ->delimiter(',')
      ->capture_default_str();
  lsh->add_option("--repetitions", lsh_cfg.repetitions)->capture_default_str();
  lsh->add_option("--k", lsh_cfg.accuracy.k)->capture_default_str();
  lsh->add_option("--b", lsh_cfg.accuracy.b)->capture_default_str();
  lsh->add_option("--epsilon", lsh_cfg.accuracy.epsilon)->capture_default_str();
  lsh->add_option("--theta", lsh_cfg.accuracy.theta)->capture_default_str();
  lsh->add_option("--x", lsh_cfg.accuracy.x)->capture_default_str();
  lsh->add_option("--pairs_per_query", lsh_cfg.accuracy.pairs_per_query)->capture_default_str();
  add_mds_flags(*lsh, lsh_cfg.accuracy.mds);
  lsh->add_option("--out", lsh_out, "CSV path, - for stdout")->capture_default_str();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exhaustive checks of the closed forms");
  tlsh::OracleOptions oracle_opts;
  std::string fault;
  oracle->add_option("--k", oracle_opts.k, "enumeration size (<= 14)")->capture_default_str();
  oracle->add_option("--x_max", oracle_opts.x_max)->capture_default_str();
  oracle->add_option("--seed", oracle_opts.seed)->capture_default_str();
  oracle->add_option("--inject-fault", fault, "negative control")
      ->check(CLI::IsMember({"good-approx-bounds"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto spec = gen_flags.resolve();
      write_trace(tlsh::generate(spec), gen_out, spec);
      return 0;
    }
    if (*store) {
      store_cfg.workload = store_flags.resolve();
      store_cfg.sweep = tlsh::parse_sweep(store_sweep);
      store_cfg.values = store_values;
      store_cfg.placements.clear();
      for (const auto& n : store_names) store_cfg.placements.push_back(parse_placement(n));
      const auto rows = tlsh::run_store_benchmark(store_cfg);
      emit(store_out, [&](std::ostream& o) { tlsh::write_store_csv(o, store_cfg, rows); });
      if (!store_timings.empty()) {
        emit(store_timings, [&](std::ostream& o) { tlsh::write_store_timing_csv(o, store_cfg, rows); });
      }
      return 0;
    }
    if (*lsh) {
      lsh_cfg.workload = lsh_flags.resolve();
      lsh_cfg.sweep = tlsh::parse_sweep(lsh_sweep);
      lsh_cfg.values = lsh_values;
      const auto rows = tlsh::run_lsh_sensitivity(lsh_cfg);
      emit(lsh_out, [&](std::ostream& o) { tlsh::write_accuracy_csv(o, lsh_cfg, rows); });
      return 0;
    }
    if (*oracle) {
      oracle_opts.inject_good_approx_off_by_one = fault == "good-approx-bounds";
      const auto report = tlsh::run_oracle_suite(oracle_opts);
      report.write(std::cout);
      return report.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
