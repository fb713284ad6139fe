#include "pushsim/cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pushsim {

TieredCache::TieredCache(std::uint64_t mem_capacity, std::uint64_t disk_capacity, SizeMode mode)
    : mem_cap_(mem_capacity), disk_cap_(disk_capacity), mode_(mode) {
  if (mem_cap_ == 0) throw ConfigError("cache: memory capacity must be positive");
}

double TieredCache::update_benefit(KeyId k, std::uint64_t freq, double weight) {
  const double value = aging_floor_ + weight * static_cast<double>(freq);
  auto [it, inserted] = benefit_.try_emplace(k, value);
  if (!inserted) {
    if (auto m = mem_.find(k); m != mem_.end()) {
      mem_order_.erase({it->second, m->second.seq, k});
      mem_order_.insert({value, m->second.seq, k});
    }
    if (auto d = disk_.find(k); d != disk_.end()) {
      const double sz = static_cast<double>(d->second.size);
      disk_order_.erase({it->second / sz, d->second.seq, k});
      disk_order_.insert({value / sz, d->second.seq, k});
    }
    it->second = value;
  }
  return value;
}

double TieredCache::benefit(KeyId k) const {
  auto it = benefit_.find(k);
  return it == benefit_.end() ? 0.0 : it->second;
}

double TieredCache::min_mem_benefit() const {
  if (mem_order_.empty()) return std::numeric_limits<double>::infinity();
  return std::get<0>(*mem_order_.begin());
}

bool TieredCache::cond_cache(KeyId k, std::optional<std::uint64_t> value, std::uint64_t size) {
  if (size == 0) throw ValidationError("cache: item size must be positive");
  return mode_ == SizeMode::Uniform ? cond_cache_uniform(k, value, size)
                                    : cond_cache_variable(k, value, size);
}

bool TieredCache::cond_cache_uniform(KeyId k, std::optional<std::uint64_t> value,
                                     std::uint64_t size) {
  if (size > mem_cap_) return false;
  if (mem_.count(k)) return true;  // already resident
  if (mem_cap_ - mem_used_ >= size) {
    if (value) admit_mem(k, *value, size);
    return true;
  }
  if (mem_order_.empty()) return false;
  if (benefit(k) > min_mem_benefit()) {
    if (value) {
      evict_mem_to_disk(std::get<2>(*mem_order_.begin()));
      admit_mem(k, *value, size);
    }
    return true;
  }
  return false;
}

bool TieredCache::cond_cache_variable(KeyId k, std::optional<std::uint64_t> value,
                                      std::uint64_t size) {
  if (size > mem_cap_) return false;
  if (mem_.count(k)) return true;
  const std::uint64_t free_mem = mem_cap_ - mem_used_;
  if (free_mem >= size) {
    if (value) admit_mem(k, *value, size);
    return true;
  }

  // prelimList: least-benefit residents until their size plus free memory
  // exceeds the incoming size.
  std::vector<std::tuple<double, std::uint64_t, KeyId>> prelim;
  std::uint64_t prelim_size = 0;
  double prelim_benefit = 0.0;
  for (const auto& rec : mem_order_) {
    prelim.push_back(rec);
    prelim_size += mem_.at(std::get<2>(rec)).size;
    prelim_benefit += std::get<0>(rec);
    if (prelim_size + free_mem > size) break;
  }
  if (prelim_size + free_mem <= size) return false;  // cannot make room
  if (benefit(k) < prelim_benefit) return false;

  if (value) {
    // Keep the highest-benefit prelim items that still leave room for k.
    const std::uint64_t budget = prelim_size + free_mem - size;
    std::uint64_t kept = 0;
    std::vector<KeyId> remove;
    for (auto it = prelim.rbegin(); it != prelim.rend(); ++it) {
      const std::uint64_t item_size = mem_.at(std::get<2>(*it)).size;
      if (kept + item_size <= budget)
        kept += item_size;
      else
        remove.push_back(std::get<2>(*it));
    }
    // Evict in ascending benefit order so the aging floor lands on the
    // highest benefit actually evicted.
    for (auto it = remove.rbegin(); it != remove.rend(); ++it) evict_mem_to_disk(*it);
    admit_mem(k, *value, size);
  }
  return true;
}

void TieredCache::admit_mem(KeyId k, std::uint64_t value, std::uint64_t size) {
  const std::uint64_t seq = next_seq_++;
  mem_.emplace(k, Entry{value, size, seq});
  mem_order_.insert({benefit(k), seq, k});
  mem_used_ += size;
}

void TieredCache::evict_mem_to_disk(KeyId k) {
  auto it = mem_.find(k);
  const double b = benefit(k);
  mem_order_.erase({b, it->second.seq, k});
  mem_used_ -= it->second.size;
  aging_floor_ = std::max(aging_floor_, b);
  ++stats_.mem_evictions;
  if (!disk_.count(k)) put_disk(k, it->second.value, it->second.size);
  mem_.erase(it);
}

void TieredCache::put_disk(KeyId k, std::uint64_t value, std::uint64_t size) {
  if (auto it = disk_.find(k); it != disk_.end()) {
    disk_order_.erase({benefit(k) / static_cast<double>(it->second.size), it->second.seq, k});
    disk_used_ -= it->second.size;
    disk_.erase(it);
  }
  evict_disk_if_needed(size);
  if (disk_cap_ != 0 && size > disk_cap_) return;  // cannot ever fit
  const std::uint64_t seq = next_seq_++;
  disk_.emplace(k, Entry{value, size, seq});
  disk_order_.insert({benefit(k) / static_cast<double>(size), seq, k});
  disk_used_ += size;
}

void TieredCache::evict_disk_if_needed(std::uint64_t incoming_size) {
  if (disk_cap_ == 0) return;
  while (!disk_order_.empty() && disk_used_ + incoming_size > disk_cap_) {
    const KeyId victim = std::get<2>(*disk_order_.begin());
    auto it = disk_.find(victim);
    disk_order_.erase(disk_order_.begin());
    disk_used_ -= it->second.size;
    disk_.erase(it);
    ++stats_.disk_evictions;
  }
}

std::optional<TieredCache::Hit> TieredCache::get(KeyId k) {
  if (auto it = mem_.find(k); it != mem_.end()) {
    ++stats_.mem_hits;
    return Hit{it->second.value, it->second.size, Tier::Memory};
  }
  if (auto it = disk_.find(k); it != disk_.end()) {
    ++stats_.disk_hits;
    Hit hit{it->second.value, it->second.size, Tier::Disk};
    if (cond_cache(k, hit.value, hit.size)) ++stats_.promotions;
    return hit;
  }
  ++stats_.misses;
  return std::nullopt;
}

std::optional<TieredCache::Hit> TieredCache::lookup(KeyId k) const {
  if (auto it = mem_.find(k); it != mem_.end())
    return Hit{it->second.value, it->second.size, Tier::Memory};
  if (auto it = disk_.find(k); it != disk_.end())
    return Hit{it->second.value, it->second.size, Tier::Disk};
  return std::nullopt;
}

void TieredCache::invalidate(KeyId k) {
  if (auto it = mem_.find(k); it != mem_.end()) {
    mem_order_.erase({benefit(k), it->second.seq, k});
    mem_used_ -= it->second.size;
    mem_.erase(it);
  }
  if (auto it = disk_.find(k); it != disk_.end()) {
    disk_order_.erase({benefit(k) / static_cast<double>(it->second.size), it->second.seq, k});
    disk_used_ -= it->second.size;
    disk_.erase(it);
  }
}

}  // namespace pushsim
