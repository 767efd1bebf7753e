#include "tlsh/mds_tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tlsh {

namespace {

constexpr std::uint64_t kMinHashSeedSalt = 0x6d696e68617368ULL;
constexpr std::uint64_t kCentroidSeedSalt = 0x63656e74726f6964ULL;

bool contains(const std::vector<std::uint32_t>& v, std::uint32_t x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

unsigned dist_h(const MdsState& s, std::uint32_t x, std::uint32_t y) {
  return minhash_distance(s.H[x], s.H[y]);
}

}  // namespace

void MdsConfig::validate() const {
  if (k == 0 || b == 0 || b > k) throw std::invalid_argument("MdsConfig: require 0 < b <= k");
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("MdsConfig: decay must be in (0, 1)");
  if (!(d_far > 0.0) || !std::isfinite(d_far)) {
    throw std::invalid_argument("MdsConfig: d_far must be positive");
  }
  if (neighbor_capacity == 0) throw std::invalid_argument("MdsConfig: neighbor capacity must be > 0");
}

MdsState::MdsState(unsigned k) : X(k, 0.0), V(k, 0.0), S(k), N(k), H(k), T(k, 0) {}

bool MdsState::is_live(std::uint32_t slot) const noexcept {
  const unsigned k = capacity();
  if (slot >= k) return false;
  return (slot + k - begin) % k < size;
}

std::vector<std::uint32_t> MdsState::live_slots() const {
  std::vector<std::uint32_t> out(size);
  for (std::uint32_t i = 0; i < size; ++i) out[i] = (begin + i) % capacity();
  return out;
}

void update_sample_and_neighbors(MdsState& s, const MdsConfig& config, Rng& rng, std::uint32_t x) {
  auto& sample = s.S[x];
  auto& near = s.N[x];
  sample.clear();
  const unsigned k = s.capacity();
  const unsigned draws = config.sample_capacity + config.neighbor_capacity;
  for (unsigned i = 0; i < draws; ++i) {
    const auto y = static_cast<std::uint32_t>((s.begin + rng.below(s.size)) % k);
    if (y == x || contains(near, y)) continue;
    if (near.size() < config.neighbor_capacity) {
      near.push_back(y);
      continue;
    }
    // farthest neighbour by current signatures; slots may have been recycled
    // since they entered N, so keys are re-evaluated rather than cached
    auto far = near.begin();
    for (auto it = near.begin(); it != near.end(); ++it) {
      if (dist_h(s, x, *it) > dist_h(s, x, *far)) far = it;
    }
    std::uint32_t to_sample = y;
    if (dist_h(s, x, y) < dist_h(s, x, *far)) {
      to_sample = *far;
      *far = y;
    }
    if (sample.size() < config.sample_capacity && !contains(sample, to_sample)) {
      sample.push_back(to_sample);
    }
  }
  std::erase_if(sample, [&](std::uint32_t y) { return contains(near, y); });
}

void update_velocity(MdsState& s, const MdsConfig& config, std::uint32_t x) {
  double force = 0.0;
  std::size_t n = 0;
  auto pull = [&](std::uint32_t y) {
    const double observed = std::abs(s.X[x] - s.X[y]);
    const double target = target_distance(dist_h(s, x, y), config);
    force += s.X[x] < s.X[y] ? observed - target : target - observed;
    ++n;
  };
  for (const auto y : s.N[x]) pull(y);
  for (const auto y : s.S[x]) {
    if (!contains(s.N[x], y)) pull(y);
  }
  if (n > 0) force /= static_cast<double>(n);
  s.V[x] = config.decay * s.V[x] + force;
}

void reconfigure(MdsState& s, const MdsConfig& config, Rng& rng, const QueryAccess& q) {
  const unsigned k = s.capacity();
  const auto pos = static_cast<std::uint32_t>((s.begin + s.size) % k);
  s.S[pos].clear();
  s.N[pos].clear();
  s.X[pos] = -0.5 + rng.unit();
  s.V[pos] = 0.0;
  s.H[pos] = minhash(std::span<const std::uint32_t>(q.positions), config.seed ^ kMinHashSeedSalt);
  s.T[pos] = q.t;
  if (s.size < k) {
    ++s.size;
  } else {
    s.begin = (s.begin + 1) % k;
  }
  for (std::uint32_t i = 0; i < s.size; ++i) {
    const std::uint32_t x = (s.begin + i) % k;
    update_sample_and_neighbors(s, config, rng, x);
    update_velocity(s, config, x);
  }
  for (std::uint32_t i = 0; i < s.size; ++i) update_coordinates(s, (s.begin + i) % k);
}

std::vector<GroupAssignment> assign_groups(const MdsState& s, const MdsConfig& config) {
  std::vector<GroupAssignment> out(s.capacity());
  if (s.size == 0) return out;
  auto ranked = s.live_slots();
  std::sort(ranked.begin(), ranked.end(), [&](std::uint32_t a, std::uint32_t b) {
    return s.X[a] != s.X[b] ? s.X[a] < s.X[b] : a < b;
  });
  const unsigned per_group = (s.size + config.b - 1) / config.b;
  const SeededHash id_hash(config.seed ^ kCentroidSeedSalt);

  struct Run {
    std::size_t lo, hi;
    std::uint32_t centroid;
    std::uint64_t centroid_hash;
  };
  std::vector<Run> runs;
  for (std::size_t lo = 0; lo < ranked.size(); lo += per_group) {
    const std::size_t hi = std::min(ranked.size(), lo + per_group);
    Run run{lo, hi, ranked[lo], id_hash(s.T[ranked[lo]])};
    for (std::size_t r = lo + 1; r < hi; ++r) {
      const auto h = id_hash(s.T[ranked[r]]);
      if (h < run.centroid_hash) {
        run.centroid_hash = h;
        run.centroid = ranked[r];
      }
    }
    runs.push_back(run);
  }

  // Runs claim labels in centroid-hash order so a stable run keeps its label
  // even when neighbouring runs change.
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return runs[a].centroid_hash != runs[b].centroid_hash
               ? runs[a].centroid_hash < runs[b].centroid_hash
               : runs[a].centroid < runs[b].centroid;
  });
  std::vector<bool> taken(config.b, false);
  for (const auto idx : order) {
    const Run& run = runs[idx];
    auto label = static_cast<unsigned>(run.centroid_hash % config.b);
    while (taken[label]) label = (label + 1) % config.b;
    taken[label] = true;
    for (std::size_t r = run.lo; r < run.hi; ++r) {
      out[ranked[r]] = GroupAssignment{label, run.centroid, s.T[run.centroid]};
    }
  }
  return out;
}

MdsTuner::MdsTuner(const MdsConfig& config)
    : config_(config), state_(config.k), rng_(config.seed), groups_(config.k) {
  config_.validate();
}

void MdsTuner::reconfigure(const QueryAccess& q) {
  if (q.t != next_t_) {
    throw std::invalid_argument("MdsTuner: expected query " + std::to_string(next_t_) + ", got " +
                                std::to_string(q.t));
  }
  tlsh::reconfigure(state_, config_, rng_, q);
  groups_ = assign_groups(state_, config_);
  ++next_t_;
}

unsigned MdsTuner::f(std::uint64_t t) const {
  const auto slot = static_cast<std::uint32_t>(t % config_.k);
  if (!state_.is_live(slot) || state_.T[slot] != t) {
    throw std::out_of_range("MdsTuner::f: query " + std::to_string(t) + " is not tracked");
  }
  return groups_[slot].group_id;
}

RoundRobinGrouping::RoundRobinGrouping(unsigned b) : b_(b) {
  if (b == 0) throw std::invalid_argument("RoundRobinGrouping: b must be > 0");
}

}  // namespace tlsh
