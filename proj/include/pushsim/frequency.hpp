#pragma once

#include <cstdint>
#include <unordered_map>

#include "pushsim/types.hpp"

namespace pushsim {

// Approximate per-key access counting (lossy counting).  Counts are
// underestimates only: reported <= true <= reported + epsilon*N, and every
// key with true count >= epsilon*N stays tracked.
class LossyCounter {
 public:
  explicit LossyCounter(double epsilon);

  // Records one access and returns the post-update estimated count.
  std::uint64_t observe(KeyId k);

  // Drops k so its effective count restarts at 0 (used on store updates).
  // No-op for untracked keys.
  void reset(KeyId k);

  // Current estimate without recording an access; 0 for untracked keys.
  std::uint64_t estimate(KeyId k) const;

  double epsilon() const { return epsilon_; }
  std::uint64_t total_seen() const { return total_seen_; }
  std::size_t tracked() const { return entries_.size(); }

 private:
  void prune();

  double epsilon_;
  std::uint64_t bucket_width_;
  std::uint64_t current_bucket_ = 1;
  std::uint64_t total_seen_ = 0;

  struct Entry {
    std::uint64_t count;
    std::uint64_t max_error;
  };
  std::unordered_map<KeyId, Entry> entries_;
};

}  // namespace pushsim
