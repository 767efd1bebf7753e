#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlsh/core_model.hpp"

namespace tlsh {

enum class AccessMode { kSequential, kRandom };

const char* access_mode_name(AccessMode m) noexcept;
AccessMode parse_access_mode(const std::string& s);

struct WorkloadSpec {
  std::uint64_t num_queries = 3000;
  std::uint64_t record_count = 100000;
  std::uint64_t record_size = 128;
  std::uint64_t records_per_query = 2000;
  /// Expected number of distinct access templates in any 100 consecutive
  /// queries, in [1, 100].
  double uniqueness_100 = 10;
  AccessMode access_mode = AccessMode::kRandom;
  /// Expected fraction of records that differ between two queries drawn
  /// from the same template; each query resamples half of it.
  double jitter = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Trace {
  std::vector<QueryAccess> queries;
  /// Template id each query was drawn from; empty for traces read from disk.
  std::vector<std::uint32_t> template_of;

  std::size_t size() const noexcept { return queries.size(); }
  bool operator==(const Trace& other) const { return queries == other.queries; }
};

/// Templates are fresh random record sets. A new template replaces the
/// current one at a steady rate of (uniqueness_100 - 1) / 99 per query, so a
/// window of 100 queries sees uniqueness_100 templates on average. Each query
/// copies its template and swaps jitter / 2 of the members for random records.
Trace generate(const WorkloadSpec& spec);

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Writes `t: p1 p2 ...` lines (ASCII, LF, ascending positions) after one
/// `#` header line carrying the generating parameters when known.
void write_trace(const Trace& trace, const std::filesystem::path& path,
                 const std::optional<WorkloadSpec>& spec = std::nullopt);
Trace read_trace(const std::filesystem::path& path);

/// Mean over every window of `window` consecutive queries of the number of
/// distinct templates in it.
double mean_distinct_templates(const Trace& trace, std::size_t window = 100);

}  // namespace tlsh
