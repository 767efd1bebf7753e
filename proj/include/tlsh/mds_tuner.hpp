#pragma once

// Self-tuning query-to-group map f. Every tracked query is a point on a line;
// points are moved by spring forces derived from single-function Min-Hash
// distances so that queries with similar access sets end up adjacent, and f
// cuts the ranked line into b balanced groups.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "tlsh/core_model.hpp"
#include "tlsh/minhash.hpp"
#include "tlsh/random.hpp"

namespace tlsh {

struct MdsConfig {
  unsigned k = 24;  ///< tracked-query window (number of points)
  unsigned b = 8;   ///< number of groups
  unsigned sample_capacity = 6;
  unsigned neighbor_capacity = 6;
  double decay = 0.5;   ///< velocity retention per sweep, in (0, 1)
  double d_far = 1.0;   ///< target coordinate distance for distinct signatures
  std::uint64_t seed = 0;

  void validate() const;
  unsigned group_capacity() const noexcept { return (k + b - 1) / b; }
};

/// Per-slot point state, a ring of k slots of which `size` are live,
/// starting at `begin`.
struct MdsState {
  std::vector<double> X;
  std::vector<double> V;
  std::vector<std::vector<std::uint32_t>> S;  ///< random sample
  std::vector<std::vector<std::uint32_t>> N;  ///< nearest neighbours
  std::vector<MinHashSignature> H;
  std::vector<std::uint64_t> T;  ///< query sequence number held by the slot
  std::uint32_t begin = 0;
  std::uint32_t size = 0;

  explicit MdsState(unsigned k = 0);
  unsigned capacity() const noexcept { return static_cast<unsigned>(X.size()); }
  bool is_live(std::uint32_t slot) const noexcept;
  /// Live slots in ring order, oldest first.
  std::vector<std::uint32_t> live_slots() const;
};

/// Target coordinate distance for a pair with the given Min-Hash distance.
inline double target_distance(unsigned minhash_dist, const MdsConfig& config) noexcept {
  return minhash_dist == 0 ? 0.0 : config.d_far;
}

void update_sample_and_neighbors(MdsState& state, const MdsConfig& config, Rng& rng,
                                 std::uint32_t x);
void update_velocity(MdsState& state, const MdsConfig& config, std::uint32_t x);
inline void update_coordinates(MdsState& state, std::uint32_t x) { state.X[x] += state.V[x]; }

/// Assigns the next query to the recycled ring slot, then runs one sweep of
/// sample/neighbour and velocity updates followed by one sweep of coordinate
/// updates over all live slots.
void reconfigure(MdsState& state, const MdsConfig& config, Rng& rng, const QueryAccess& q);

struct GroupAssignment {
  unsigned group_id = 0;         ///< value of f for members of the group
  std::uint32_t centroid = 0;    ///< slot whose identifier hash is minimal
  std::uint64_t centroid_query = 0;
};

/// Ranks live slots by coordinate, cuts the ranking into at most b runs of
/// at most ceil(size / b) slots and labels each run. Collisions between run
/// labels are resolved by probing to the next free value, so each value in
/// [0, b) labels at most one run. Indexed by slot; entries of dead slots are
/// unspecified.
std::vector<GroupAssignment> assign_groups(const MdsState& state, const MdsConfig& config);

/// Anything that maps query sequence numbers to balanced groups.
class QueryGrouping {
 public:
  virtual ~QueryGrouping() = default;
  virtual void reconfigure(const QueryAccess& q) = 0;
  virtual unsigned f(std::uint64_t t) const = 0;
  virtual unsigned groups() const noexcept = 0;
};

class MdsTuner final : public QueryGrouping {
 public:
  explicit MdsTuner(const MdsConfig& config);

  void reconfigure(const QueryAccess& q) override;
  /// Group of query t; t must still be tracked (one of the last k queries).
  unsigned f(std::uint64_t t) const override;
  unsigned groups() const noexcept override { return config_.b; }

  const MdsState& state() const noexcept { return state_; }
  const MdsConfig& config() const noexcept { return config_; }
  const GroupAssignment& assignment(std::uint32_t slot) const { return groups_.at(slot); }
  std::uint64_t queries_seen() const noexcept { return next_t_; }

 private:
  MdsConfig config_;
  MdsState state_;
  Rng rng_;
  std::vector<GroupAssignment> groups_;
  std::uint64_t next_t_ = 0;
};

/// Workload-oblivious grouping f(t) = t mod b.
class RoundRobinGrouping final : public QueryGrouping {
 public:
  explicit RoundRobinGrouping(unsigned b);
  void reconfigure(const QueryAccess&) override {}
  unsigned f(std::uint64_t t) const override { return static_cast<unsigned>(t % b_); }
  unsigned groups() const noexcept override { return b_; }

 private:
  unsigned b_;
};

}  // namespace tlsh
