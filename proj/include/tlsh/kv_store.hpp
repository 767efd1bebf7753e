#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tlsh/mds_tuner.hpp"
#include "tlsh/tunable_lsh.hpp"
#include "tlsh/utilization_window.hpp"

namespace tlsh {

class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// How a store decides the home page of a record.
enum class Placement {
  kTunable,            ///< Tunable-LSH with the Min-Hash/MDS grouping
  kTunableRoundRobin,  ///< Tunable-LSH with f(t) = t mod b
  kBitSampling,        ///< bit sampling over the exact k-query window
  kStatic,             ///< uniform hash of the key, never retuned
};

const char* placement_name(Placement p) noexcept;

struct StoreConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t record_size = 128;
  std::uint64_t num_pages = 1024;  ///< epsilon
  /// Distinct keys the store accepts; 0 means num_pages * records_per_page.
  std::uint64_t max_records = 0;
  Placement placement = Placement::kTunable;
  unsigned k = 24;
  unsigned b = 8;
  MdsConfig mds{};
  /// Record moves allowed per query; unset means one per accessed record.
  std::optional<std::uint64_t> move_budget;
  std::uint64_t seed = 0;

  std::uint64_t records_per_page() const noexcept { return page_size / record_size; }
  std::uint64_t record_capacity() const noexcept;
  void validate() const;
};

struct Location {
  std::uint64_t page = 0;
  std::uint32_t slot = 0;
  bool operator==(const Location&) const = default;
};

/// Per-query counters. Times are monotonic-clock nanoseconds.
struct QueryMetrics {
  std::uint64_t query_id = 0;
  std::uint64_t fetch_ns = 0;
  std::uint64_t tune_ns = 0;
  std::uint64_t records_accessed = 0;
  std::uint64_t pages_touched = 0;
  std::uint64_t moves = 0;
};

/// In-memory paged key-value store. Between begin_query() and end_query()
/// every get() is recorded; end_query() retunes the placement hash and moves
/// the accessed records toward their new home pages.
class PagedStore {
 public:
  explicit PagedStore(const StoreConfig& config);

  /// Inserts or overwrites. Throws CapacityError when full and
  /// std::invalid_argument on a payload of the wrong size.
  void put(std::uint64_t key, std::span<const std::byte> payload);
  /// Throws NotFoundError for an absent key.
  std::span<const std::byte> get(std::uint64_t key);
  bool contains(std::uint64_t key) const { return directory_.contains(key); }

  void begin_query();
  /// Feeds the query into the placement hash, relocates within the move
  /// budget and returns the query id.
  std::uint64_t end_query();
  /// Moves records of the last ended query toward their current targets.
  std::uint64_t relocate(std::uint64_t budget);

  std::uint64_t size() const noexcept { return directory_.size(); }
  std::uint64_t num_pages() const noexcept { return config_.num_pages; }
  std::uint64_t page_fill(std::uint64_t page) const { return fill_.at(page); }
  std::optional<Location> locate(std::uint64_t key) const;
  /// Home page the placement hash currently assigns to `key`.
  std::uint64_t target_page(std::uint64_t key) const;
  bool query_open() const noexcept { return query_open_; }

  const std::vector<QueryMetrics>& metrics() const noexcept { return metrics_; }
  const StoreConfig& config() const noexcept { return config_; }
  const TunableLsh* lsh() const noexcept { return lsh_.get(); }

  /// Throws std::logic_error if the directory and pages disagree.
  void check_integrity() const;
  /// All (key, payload) pairs, sorted by key.
  std::vector<std::pair<std::uint64_t, std::vector<std::byte>>> contents() const;

 private:
  struct Entry {
    std::uint32_t position;
    Location loc;
  };
  static constexpr std::uint32_t kEmpty = 0xffffffffU;

  std::uint64_t target_of(std::uint32_t position) const;
  /// First page with a free slot at probe distance < `limit` from `target`.
  std::optional<std::uint64_t> probe_free(std::uint64_t target, std::uint64_t limit) const;
  std::uint32_t free_slot(std::uint64_t page) const;
  void occupy(std::uint64_t page, std::uint32_t slot, std::uint32_t position);
  void vacate(std::uint64_t page, std::uint32_t slot);
  std::byte* slot_data(const Location& loc);
  const std::byte* slot_data(const Location& loc) const;
  std::uint64_t probe_distance(std::uint64_t from, std::uint64_t page) const noexcept;

  StoreConfig config_;
  std::uint64_t per_page_;
  std::vector<std::byte> data_;
  std::vector<std::uint32_t> owner_;   // page-major slot -> position
  std::vector<std::uint32_t> fill_;
  std::vector<std::uint64_t> has_free_;  // bitmap over pages
  std::unordered_map<std::uint64_t, Entry> directory_;
  std::vector<std::uint64_t> key_of_;  // position -> key

  std::unique_ptr<TunableLsh> lsh_;
  std::unique_ptr<UtilizationWindow> window_;
  std::vector<unsigned> sampled_;

  bool query_open_ = false;
  std::uint64_t query_id_ = 0;
  std::uint64_t tuned_queries_ = 0;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint64_t> seen_record_;  // position -> epoch of last access
  std::vector<std::uint64_t> seen_page_;
  std::vector<std::uint32_t> accessed_;
  std::vector<std::uint32_t> last_accessed_;
  QueryMetrics current_{};
  std::vector<QueryMetrics> metrics_;
};

}  // namespace tlsh
