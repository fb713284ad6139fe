#include "pushsim/frequency.hpp"

#include <cmath>

namespace pushsim {

LossyCounter::LossyCounter(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("lossy counter epsilon must be in (0,1)");
  bucket_width_ = static_cast<std::uint64_t>(std::ceil(1.0 / epsilon));
}

std::uint64_t LossyCounter::observe(KeyId k) {
  ++total_seen_;
  current_bucket_ = (total_seen_ + bucket_width_ - 1) / bucket_width_;
  auto [it, inserted] = entries_.try_emplace(k, Entry{0, current_bucket_ - 1});
  ++it->second.count;
  const std::uint64_t result = it->second.count;
  if (total_seen_ % bucket_width_ == 0) prune();
  return result;
}

void LossyCounter::reset(KeyId k) { entries_.erase(k); }

std::uint64_t LossyCounter::estimate(KeyId k) const {
  auto it = entries_.find(k);
  return it == entries_.end() ? 0 : it->second.count;
}

void LossyCounter::prune() {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.count + it->second.max_error <= current_bucket_)
      it = entries_.erase(it);
    else
      ++it;
  }
}

}  // namespace pushsim
