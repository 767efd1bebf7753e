#include "tlsh/kv_store.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <string>

namespace tlsh {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point since) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count());
}

}  // namespace

const char* placement_name(Placement p) noexcept {
  switch (p) {
    case Placement::kTunable: return "self-clustering";
    case Placement::kTunableRoundRobin: return "self-clustering-unoptimized";
    case Placement::kBitSampling: return "bit-sampling";
    case Placement::kStatic: return "static";
  }
  return "unknown";
}

std::uint64_t StoreConfig::record_capacity() const noexcept {
  return max_records != 0 ? max_records : num_pages * records_per_page();
}

void StoreConfig::validate() const {
  if (record_size == 0 || page_size < record_size) {
    throw std::invalid_argument("StoreConfig: record size must be in [1, page size]");
  }
  if (num_pages == 0) throw std::invalid_argument("StoreConfig: need at least one page");
  if (records_per_page() >= 0xffffffffULL) throw std::invalid_argument("StoreConfig: page too large");
  if (record_capacity() >= 0xffffffffULL) throw std::invalid_argument("StoreConfig: too many records");
  if (placement == Placement::kBitSampling && (k == 0 || k > 64 || b > k)) {
    throw std::invalid_argument("StoreConfig: bit sampling needs 0 < b <= k <= 64");
  }
}

PagedStore::PagedStore(const StoreConfig& config) : config_(config) {
  config_.validate();
  per_page_ = config_.records_per_page();
  const std::uint64_t slots = config_.num_pages * per_page_;
  data_.assign(config_.num_pages * config_.page_size, std::byte{0});
  owner_.assign(slots, kEmpty);
  fill_.assign(config_.num_pages, 0);
  has_free_.assign((config_.num_pages + 63) / 64, 0);
  for (std::uint64_t p = 0; p < config_.num_pages; ++p) has_free_[p / 64] |= 1ULL << (p % 64);

  const std::uint64_t omega = config_.record_capacity();
  seen_record_.assign(omega, 0);
  seen_page_.assign(config_.num_pages, 0);

  LshConfig lsh;
  lsh.k = config_.k;
  lsh.b = config_.b;
  lsh.epsilon = config_.num_pages;
  lsh.omega = omega;
  lsh.seed = config_.seed;
  switch (config_.placement) {
    case Placement::kTunable: {
      MdsConfig mds = config_.mds;
      mds.seed = config_.seed;
      lsh_ = std::make_unique<TunableLsh>(lsh, mds);
      break;
    }
    case Placement::kTunableRoundRobin:
      lsh_ = std::make_unique<TunableLsh>(lsh, std::make_unique<RoundRobinGrouping>(config_.b));
      break;
    case Placement::kBitSampling:
      window_ = std::make_unique<UtilizationWindow>(config_.k, omega);
      sampled_ = draw_sample_positions(config_.k, config_.b, config_.seed);
      break;
    case Placement::kStatic:
      break;
  }
}

std::uint64_t PagedStore::target_of(std::uint32_t position) const {
  switch (config_.placement) {
    case Placement::kTunable:
    case Placement::kTunableRoundRobin:
      return lsh_->hash(position);
    case Placement::kBitSampling:
      return bit_sampling_hash(window_->mask(position), sampled_, config_.num_pages);
    case Placement::kStatic:
      return static_hash(key_of_[position], config_.num_pages, config_.seed);
  }
  return 0;
}

std::uint64_t PagedStore::probe_distance(std::uint64_t from, std::uint64_t page) const noexcept {
  return (page + config_.num_pages - from) % config_.num_pages;
}

std::optional<std::uint64_t> PagedStore::probe_free(std::uint64_t target,
                                                    std::uint64_t limit) const {
  const std::uint64_t n = config_.num_pages;
  // scan [target, n) then [0, target) word by word
  auto scan = [&](std::uint64_t lo, std::uint64_t hi) -> std::optional<std::uint64_t> {
    std::uint64_t p = lo;
    while (p < hi) {
      const std::uint64_t w = has_free_[p / 64] >> (p % 64);
      if (w == 0) {
        p = (p / 64 + 1) * 64;
        continue;
      }
      const std::uint64_t found = p + static_cast<std::uint64_t>(std::countr_zero(w));
      if (found < hi) return found;
      return std::nullopt;
    }
    return std::nullopt;
  };
  std::optional<std::uint64_t> hit = scan(target, n);
  if (!hit && target > 0) hit = scan(0, target);
  if (hit && probe_distance(target, *hit) < limit) return hit;
  return std::nullopt;
}

std::uint32_t PagedStore::free_slot(std::uint64_t page) const {
  const std::uint32_t* o = &owner_[page * per_page_];
  for (std::uint32_t s = 0; s < per_page_; ++s) {
    if (o[s] == kEmpty) return s;
  }
  throw std::logic_error("PagedStore: page marked free has no free slot");
}

void PagedStore::occupy(std::uint64_t page, std::uint32_t slot, std::uint32_t position) {
  owner_[page * per_page_ + slot] = position;
  if (++fill_[page] == per_page_) has_free_[page / 64] &= ~(1ULL << (page % 64));
}

void PagedStore::vacate(std::uint64_t page, std::uint32_t slot) {
  owner_[page * per_page_ + slot] = kEmpty;
  --fill_[page];
  has_free_[page / 64] |= 1ULL << (page % 64);
}

std::byte* PagedStore::slot_data(const Location& loc) {
  return data_.data() + loc.page * config_.page_size + loc.slot * config_.record_size;
}

const std::byte* PagedStore::slot_data(const Location& loc) const {
  return data_.data() + loc.page * config_.page_size + loc.slot * config_.record_size;
}

void PagedStore::put(std::uint64_t key, std::span<const std::byte> payload) {
  if (payload.size() != config_.record_size) {
    throw std::invalid_argument("PagedStore::put: payload must be exactly " +
                                std::to_string(config_.record_size) + " bytes");
  }
  if (auto it = directory_.find(key); it != directory_.end()) {
    std::memcpy(slot_data(it->second.loc), payload.data(), payload.size());
    return;
  }
  if (key_of_.size() >= config_.record_capacity()) {
    throw CapacityError("PagedStore::put: record capacity reached");
  }
  const auto position = static_cast<std::uint32_t>(key_of_.size());
  key_of_.push_back(key);
  const std::uint64_t target = target_of(position);
  const auto page = probe_free(target, config_.num_pages);
  if (!page) {
    key_of_.pop_back();
    throw CapacityError("PagedStore::put: every page is full");
  }
  const Location loc{*page, free_slot(*page)};
  occupy(loc.page, loc.slot, position);
  directory_.emplace(key, Entry{position, loc});
  std::memcpy(slot_data(loc), payload.data(), payload.size());
}

std::span<const std::byte> PagedStore::get(std::uint64_t key) {
  const auto start = Clock::now();
  const auto it = directory_.find(key);
  if (it == directory_.end()) throw NotFoundError("PagedStore::get: key not found");
  const Entry& e = it->second;
  if (query_open_) {
    if (seen_record_[e.position] != epoch_) {
      seen_record_[e.position] = epoch_;
      accessed_.push_back(e.position);
    }
    if (seen_page_[e.loc.page] != epoch_) {
      seen_page_[e.loc.page] = epoch_;
      ++current_.pages_touched;
    }
  }
  std::span<const std::byte> out(slot_data(e.loc), config_.record_size);
  if (query_open_) current_.fetch_ns += elapsed_ns(start);
  return out;
}

void PagedStore::begin_query() {
  if (query_open_) throw StateError("PagedStore::begin_query: a query is already open");
  query_open_ = true;
  ++epoch_;
  accessed_.clear();
  current_ = QueryMetrics{};
  current_.query_id = query_id_;
}

std::uint64_t PagedStore::end_query() {
  if (!query_open_) throw StateError("PagedStore::end_query: no open query");
  query_open_ = false;
  current_.records_accessed = accessed_.size();
  const auto start = Clock::now();
  last_accessed_.swap(accessed_);
  accessed_.clear();
  if (!last_accessed_.empty() && config_.placement != Placement::kStatic) {
    std::vector<std::uint32_t> positions(last_accessed_);
    std::sort(positions.begin(), positions.end());
    const QueryAccess q{tuned_queries_++, std::move(positions)};
    if (lsh_) lsh_->tune(q);
    if (window_) window_->record(q);
    current_.moves = relocate(config_.move_budget.value_or(last_accessed_.size()));
  }
  current_.tune_ns = elapsed_ns(start);
  metrics_.push_back(current_);
  return query_id_++;
}

std::uint64_t PagedStore::relocate(std::uint64_t budget) {
  if (query_open_) throw StateError("PagedStore::relocate: a query is open");
  if (budget == 0 || config_.placement == Placement::kStatic) return 0;

  struct Move {
    std::uint64_t target;
    std::uint32_t position;
    Entry* entry;
  };
  std::vector<Move> wanted;
  wanted.reserve(last_accessed_.size());
  for (const auto pos : last_accessed_) {
    const std::uint64_t target = target_of(pos);
    Entry& e = directory_.at(key_of_[pos]);
    if (e.loc.page != target) wanted.push_back({target, pos, &e});
  }
  // batch by destination so records bound for one page move together
  std::sort(wanted.begin(), wanted.end(), [](const Move& a, const Move& b) {
    return a.target != b.target ? a.target < b.target : a.position < b.position;
  });

  std::uint64_t moves = 0;
  // First page with a free slot for the current target. Moves only fill
  // pages, so it stays the first free one until it fills up.
  std::optional<std::uint64_t> first_free;
  std::uint64_t batch_target = config_.num_pages;
  for (const auto& m : wanted) {
    if (moves == budget) break;
    Entry& e = *m.entry;
    if (m.target != batch_target || !first_free || fill_[*first_free] == per_page_) {
      batch_target = m.target;
      first_free = probe_free(m.target, config_.num_pages);
    }
    if (!first_free || probe_distance(m.target, *first_free) >= probe_distance(m.target, e.loc.page)) {
      continue;
    }
    const Location to{*first_free, free_slot(*first_free)};
    std::memcpy(slot_data(to), slot_data(e.loc), config_.record_size);
    vacate(e.loc.page, e.loc.slot);
    occupy(to.page, to.slot, m.position);
    e.loc = to;
    ++moves;
  }
  return moves;
}

std::optional<Location> PagedStore::locate(std::uint64_t key) const {
  const auto it = directory_.find(key);
  if (it == directory_.end()) return std::nullopt;
  return it->second.loc;
}

std::uint64_t PagedStore::target_page(std::uint64_t key) const {
  const auto it = directory_.find(key);
  if (it == directory_.end()) throw NotFoundError("PagedStore::target_page: key not found");
  return target_of(it->second.position);
}

void PagedStore::check_integrity() const {
  std::uint64_t occupied = 0;
  for (std::uint64_t page = 0; page < config_.num_pages; ++page) {
    std::uint64_t n = 0;
    for (std::uint32_t s = 0; s < per_page_; ++s) {
      const std::uint32_t pos = owner_[page * per_page_ + s];
      if (pos == kEmpty) continue;
      ++n;
      if (pos >= key_of_.size()) throw std::logic_error("integrity: slot owner out of range");
      const auto it = directory_.find(key_of_[pos]);
      if (it == directory_.end()) throw std::logic_error("integrity: orphan slot");
      if (it->second.position != pos || !(it->second.loc == Location{page, s})) {
        throw std::logic_error("integrity: directory disagrees with slot");
      }
    }
    if (n != fill_[page]) throw std::logic_error("integrity: fill count mismatch");
    if (n > per_page_) throw std::logic_error("integrity: page over capacity");
    const bool free_bit = (has_free_[page / 64] >> (page % 64)) & 1U;
    if (free_bit != (n < per_page_)) throw std::logic_error("integrity: free bitmap mismatch");
    occupied += n;
  }
  if (occupied != directory_.size()) throw std::logic_error("integrity: key count mismatch");
  for (const auto& [key, e] : directory_) {
    if (owner_[e.loc.page * per_page_ + e.loc.slot] != e.position || key_of_[e.position] != key) {
      throw std::logic_error("integrity: key does not resolve to its slot");
    }
  }
}

std::vector<std::pair<std::uint64_t, std::vector<std::byte>>> PagedStore::contents() const {
  std::vector<std::pair<std::uint64_t, std::vector<std::byte>>> out;
  out.reserve(directory_.size());
  for (const auto& [key, e] : directory_) {
    const std::byte* d = slot_data(e.loc);
    out.emplace_back(key, std::vector<std::byte>(d, d + config_.record_size));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace tlsh
