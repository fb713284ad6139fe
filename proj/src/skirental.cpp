#include "pushsim/skirental.hpp"

#include <algorithm>
#include <cmath>

namespace pushsim {

std::optional<double> threshold(const SkiParams& p) {
  if (p.rent <= p.recurring) return std::nullopt;
  return p.buy / (p.rent - p.recurring);
}

SkiDecision decide(const SkiParams& p, std::uint64_t access_count) {
  auto m = threshold(p);
  if (!m) return SkiDecision::Rent;
  if (static_cast<double>(access_count) <= std::floor(*m)) return SkiDecision::Rent;
  return SkiDecision::Buy;
}

double offline_optimal_cost(const SkiParams& p, std::uint64_t n) {
  const double dn = static_cast<double>(n);
  return std::min(p.rent * dn, p.buy + p.recurring * dn);
}

double policy_cost(const SkiParams& p, std::uint64_t n) {
  const double dn = static_cast<double>(n);
  auto m = threshold(p);
  if (!m) return p.rent * dn;
  const double rented = std::min(dn, std::floor(*m));
  double cost = p.rent * rented;
  if (dn > rented) cost += p.buy + p.recurring * (dn - rented);
  return cost;
}

}  // namespace pushsim
