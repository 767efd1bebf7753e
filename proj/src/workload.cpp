#include "tlsh/workload.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "tlsh/random.hpp"

namespace tlsh {

const char* access_mode_name(AccessMode m) noexcept {
  return m == AccessMode::kSequential ? "sequential" : "random";
}

AccessMode parse_access_mode(const std::string& s) {
  if (s == "sequential") return AccessMode::kSequential;
  if (s == "random") return AccessMode::kRandom;
  throw std::invalid_argument("unknown access mode '" + s + "'");
}

void WorkloadSpec::validate() const {
  if (record_count == 0 || record_count >= 0xffffffffULL) {
    throw std::invalid_argument("WorkloadSpec: record_count must be in [1, 2^32 - 1)");
  }
  if (records_per_query == 0 || records_per_query > record_count) {
    throw std::invalid_argument("WorkloadSpec: records_per_query must be in [1, record_count]");
  }
  if (!(uniqueness_100 >= 1.0 && uniqueness_100 <= 100.0)) {
    throw std::invalid_argument("WorkloadSpec: uniqueness_100 must be in [1, 100]");
  }
  if (!(jitter >= 0.0 && jitter <= 1.0)) {
    throw std::invalid_argument("WorkloadSpec: jitter must be in [0, 1]");
  }
  if (record_size == 0) throw std::invalid_argument("WorkloadSpec: record_size must be positive");
}

namespace {

std::vector<std::uint32_t> random_subset(Rng& rng, std::uint64_t n, std::uint64_t count) {
  // Floyd's algorithm
  std::unordered_set<std::uint32_t> chosen;
  chosen.reserve(count * 2);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::uint64_t j = n - count; j < n; ++j) {
    auto t = static_cast<std::uint32_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) {
      t = static_cast<std::uint32_t>(j);
      chosen.insert(t);
    }
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> make_template(Rng& rng, const WorkloadSpec& spec) {
  if (spec.access_mode == AccessMode::kSequential) {
    const std::uint64_t start = rng.below(spec.record_count - spec.records_per_query + 1);
    std::vector<std::uint32_t> out(spec.records_per_query);
    for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint32_t>(start + i);
    return out;
  }
  return random_subset(rng, spec.record_count, spec.records_per_query);
}

std::vector<std::uint32_t> jittered(Rng& rng, const std::vector<std::uint32_t>& base,
                                    const WorkloadSpec& spec) {
  std::vector<std::uint32_t> out = base;
  const auto n = out.size();
  const std::uint64_t outsiders = spec.record_count - n;
  // Two queries of one template differ in about `jitter` of their records,
  // so each resamples half of that; fractional swaps are rounded randomly.
  const double expected = spec.jitter * 0.5 * static_cast<double>(n);
  auto swaps = static_cast<std::uint64_t>(expected);
  if (rng.bernoulli(expected - static_cast<double>(swaps))) ++swaps;
  swaps = std::min(swaps, outsiders);
  if (swaps == 0) return out;
  std::unordered_set<std::uint32_t> members(out.begin(), out.end());
  for (std::uint64_t i = 0; i < swaps; ++i) {
    const auto victim = i + rng.below(n - i);  // partial shuffle picks distinct victims
    std::swap(out[i], out[victim]);
    std::uint32_t fresh;
    do {
      fresh = static_cast<std::uint32_t>(rng.below(spec.record_count));
    } while (members.contains(fresh));
    members.insert(fresh);
    out[i] = fresh;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Trace generate(const WorkloadSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double switch_rate = (spec.uniqueness_100 - 1.0) / 99.0;
  double phase = rng.unit();
  Trace trace;
  trace.queries.reserve(spec.num_queries);
  trace.template_of.reserve(spec.num_queries);
  std::uint32_t current_id = 0;
  std::vector<std::uint32_t> current = make_template(rng, spec);
  for (std::uint64_t t = 0; t < spec.num_queries; ++t) {
    if (t > 0) {
      phase += switch_rate;
      if (phase >= 1.0) {
        phase -= 1.0;
        current = make_template(rng, spec);
        ++current_id;
      }
    }
    trace.queries.push_back(QueryAccess{t, jittered(rng, current, spec)});
    trace.template_of.push_back(current_id);
  }
  return trace;
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

void write_trace(const Trace& trace, const std::filesystem::path& path,
                 const std::optional<WorkloadSpec>& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trace: cannot open " + path.string());
  out << "# tlsh-trace";
  if (spec) {
    out << " num_queries=" << spec->num_queries << " record_count=" << spec->record_count
        << " record_size=" << spec->record_size << " records_per_query=" << spec->records_per_query
        << " uniqueness_100=" << spec->uniqueness_100
        << " access_mode=" << access_mode_name(spec->access_mode) << " jitter=" << spec->jitter
        << " seed=" << spec->seed;
  }
  out << '\n';
  for (const auto& q : trace.queries) {
    out << q.t << ':';
    for (const auto p : q.positions) out << ' ' << p;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_trace: write failed for " + path.string());
}

namespace {

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_trace: cannot open " + path.string());
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw TraceParseError(line_no, "missing ':'");
    std::uint64_t t = 0;
    if (!parse_uint(std::string_view(line).substr(0, colon), t)) {
      throw TraceParseError(line_no, "bad query number");
    }
    if (t != trace.queries.size()) {
      throw TraceParseError(line_no, "expected query " + std::to_string(trace.queries.size()));
    }
    QueryAccess q{t, {}};
    std::string_view rest = std::string_view(line).substr(colon + 1);
    while (!rest.empty()) {
      if (rest.front() != ' ') throw TraceParseError(line_no, "positions must be space-separated");
      rest.remove_prefix(1);
      const auto next = rest.find(' ');
      const auto token = rest.substr(0, next);
      std::uint32_t p = 0;
      if (!parse_uint(token, p)) throw TraceParseError(line_no, "bad position '" + std::string(token) + "'");
      if (!q.positions.empty() && q.positions.back() >= p) {
        throw TraceParseError(line_no, "positions must be strictly ascending");
      }
      q.positions.push_back(p);
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
    }
    trace.queries.push_back(std::move(q));
  }
  return trace;
}

double mean_distinct_templates(const Trace& trace, std::size_t window) {
  const auto& ids = trace.template_of;
  if (ids.size() < window || window == 0) {
    throw std::invalid_argument("mean_distinct_templates: trace shorter than window");
  }
  std::map<std::uint32_t, std::size_t> counts;
  for (std::size_t i = 0; i < window; ++i) ++counts[ids[i]];
  double total = static_cast<double>(counts.size());
  for (std::size_t i = window; i < ids.size(); ++i) {
    ++counts[ids[i]];
    if (--counts[ids[i - window]] == 0) counts.erase(ids[i - window]);
    total += static_cast<double>(counts.size());
  }
  return total / static_cast<double>(ids.size() - window + 1);
}

}  // namespace tlsh
