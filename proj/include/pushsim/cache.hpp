#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "pushsim/types.hpp"

namespace pushsim {

// Two-tier cache: a bounded memory tier backed by a (optionally bounded) disk
// tier.  Admission to memory is benefit-gated; the benefit of a key is
// aging_floor + weight * frequency, with the floor raised to the benefit of
// each item evicted from memory (greedy-dual aging).  An item evicted from
// memory moves to the disk tier; an item promoted from disk keeps its disk
// copy.  Values are opaque 64-bit handles; sizes are tracked explicitly.
class TieredCache {
 public:
  enum class SizeMode { Uniform, Variable };

  struct Stats {
    std::uint64_t mem_hits = 0;
    std::uint64_t disk_hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t mem_evictions = 0;
    std::uint64_t disk_evictions = 0;
    std::uint64_t promotions = 0;
  };

  // disk_capacity 0 means unbounded.
  TieredCache(std::uint64_t mem_capacity, std::uint64_t disk_capacity, SizeMode mode);

  // benefit(k) <- aging_floor + weight * freq; returns the new benefit and
  // reorders the key in any tier it resides in.
  double update_benefit(KeyId k, std::uint64_t freq, double weight);
  double benefit(KeyId k) const;

  // condCacheInMemory.  With a value present, admits (possibly evicting lower
  // benefit residents to disk) and returns true, or returns false leaving the
  // cache untouched.  With the value absent, computes the same decision
  // without mutating either tier.
  bool cond_cache(KeyId k, std::optional<std::uint64_t> value, std::uint64_t size);

  // Inserts directly into the disk tier (a fetch that targeted dCache).
  void put_disk(KeyId k, std::uint64_t value, std::uint64_t size);

  struct Hit {
    std::uint64_t value;
    std::uint64_t size;
    Tier tier;
  };
  // Memory tier first, then disk.  A disk hit runs the memory-admission check
  // and promotes the item when it passes (disk copy retained).
  std::optional<Hit> get(KeyId k);

  // Peek without hit accounting or promotion.
  std::optional<Hit> lookup(KeyId k) const;

  void invalidate(KeyId k);

  // When the disk tier is bounded, evicts lowest benefit/size ratio items
  // until incoming_size fits.  Ratio ties evict the oldest item first.
  void evict_disk_if_needed(std::uint64_t incoming_size);

  double aging_floor() const { return aging_floor_; }
  std::uint64_t mem_used() const { return mem_used_; }
  std::uint64_t disk_used() const { return disk_used_; }
  std::uint64_t mem_capacity() const { return mem_cap_; }
  std::size_t mem_items() const { return mem_.size(); }
  std::size_t disk_items() const { return disk_.size(); }
  const Stats& stats() const { return stats_; }
  SizeMode mode() const { return mode_; }

  // Lowest benefit among memory residents (infinity when empty).
  double min_mem_benefit() const;

 private:
  struct Entry {
    std::uint64_t value;
    std::uint64_t size;
    std::uint64_t seq;  // admission order, used as the benefit tie-break
  };
  // (benefit, admission seq, key): older items order first within a benefit.
  using Order = std::set<std::tuple<double, std::uint64_t, KeyId>>;

  bool cond_cache_uniform(KeyId k, std::optional<std::uint64_t> value, std::uint64_t size);
  bool cond_cache_variable(KeyId k, std::optional<std::uint64_t> value, std::uint64_t size);
  void admit_mem(KeyId k, std::uint64_t value, std::uint64_t size);
  void evict_mem_to_disk(KeyId k);

  std::uint64_t mem_cap_;
  std::uint64_t disk_cap_;
  SizeMode mode_;
  std::uint64_t mem_used_ = 0;
  std::uint64_t disk_used_ = 0;
  double aging_floor_ = 0.0;
  std::uint64_t next_seq_ = 0;

  std::unordered_map<KeyId, double> benefit_;
  std::unordered_map<KeyId, Entry> mem_;
  std::unordered_map<KeyId, Entry> disk_;
  Order mem_order_;
  Order disk_order_;  // keyed by benefit/size ratio
  Stats stats_;
};

}  // namespace pushsim
