#pragma once

#include <cstdint>
#include <optional>

#include "pushsim/types.hpp"

namespace pushsim {

// Rent/buy costs for one key: rent = issue a compute request, buy = fetch the
// stored value, recurring = per-access local cost paid after the fetch
// (CPU for the memory tier, CPU+disk for the disk tier).
struct SkiParams {
  double rent;       // r > 0
  double buy;        // b >= 0
  double recurring;  // b_r >= 0
};

enum class SkiDecision { Rent, Buy };

// Access count at which buying becomes worthwhile: M = b / (r - b_r).
// Absent when r <= b_r (renting is never beaten by buying).
std::optional<double> threshold(const SkiParams& p);

// Rent while the access count (including the current access) is <= floor(M).
SkiDecision decide(const SkiParams& p, std::uint64_t access_count);

// Cost of the best fixed choice in hindsight for n accesses: min(r*n, b + b_r*n).
double offline_optimal_cost(const SkiParams& p, std::uint64_t n);

// Cost actually paid when following decide() for n accesses.
double policy_cost(const SkiParams& p, std::uint64_t n);

}  // namespace pushsim
