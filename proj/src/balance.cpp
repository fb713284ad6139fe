#include "pushsim/balance.hpp"

#include <algorithm>
#include <cmath>

namespace pushsim {

double comp_cpu(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d,
                FormulaFidelity fidelity) {
  const double returned_other = s.pending_remote_other - s.expected_remote_other;
  const double returned_j = j.pending_compute_from_origin - j.expected_local_from_origin;
  const double tc_returned = fidelity == FormulaFidelity::Printed ? j.tc_data : s.tc_compute;
  return s.tc_compute * s.pending_local + tc_returned * returned_other +
         tc_returned * returned_j + tc_returned * (b - d);
}

double comp_net(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d) {
  const SizeProfile& z = s.sizes;
  const double returned_other = s.pending_remote_other - s.expected_remote_other;
  const double returned_j = j.pending_compute_from_origin - j.expected_local_from_origin;
  const double bytes = s.pending_data_sends * (z.s_k + z.s_v) +
                       s.pending_compute_sends * (z.s_k + z.s_p) +
                       s.pending_data_responses * z.s_v + returned_other * z.s_v +
                       s.expected_remote_other * z.s_cv + returned_j * z.s_v +
                       j.expected_local_from_origin * z.s_cv + d * z.s_cv + (b - d) * z.s_v;
  return bytes / s.net_bw;
}

double data_cpu(const DataNodeLoad& j, double d) {
  return j.tc_data * (j.expected_local_total + d);
}

double data_net(const DataNodeLoad& j, double b, double d) {
  const SizeProfile& z = j.sizes;
  const double returned = j.pending_compute_total - j.expected_local_total;
  const double bytes = j.pending_data_requests * (z.s_k + z.s_v) +
                       j.pending_data_responses * z.s_v +
                       j.pending_compute_total * (z.s_k + z.s_p) + returned * z.s_v +
                       j.expected_local_total * z.s_cv + d * z.s_cv + (b - d) * z.s_v;
  return bytes / j.net_bw;
}

double batch_completion(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d,
                        FormulaFidelity fidelity) {
  return std::max({comp_cpu(s, j, b, d, fidelity), comp_net(s, j, b, d), data_cpu(j, d),
                   data_net(j, b, d)});
}

namespace {

// Subgradient of the max at point d: slope range of the active pieces.
struct Slope {
  double lo;
  double hi;
};

Slope active_slope(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d,
                   FormulaFidelity fidelity) {
  const double tc_returned = fidelity == FormulaFidelity::Printed ? j.tc_data : s.tc_compute;
  const double values[4] = {comp_cpu(s, j, b, d, fidelity), comp_net(s, j, b, d),
                            data_cpu(j, d), data_net(j, b, d)};
  const double slopes[4] = {-tc_returned, (s.sizes.s_cv - s.sizes.s_v) / s.net_bw, j.tc_data,
                            (j.sizes.s_cv - j.sizes.s_v) / j.net_bw};
  const double fmax = std::max({values[0], values[1], values[2], values[3]});
  const double tol = 1e-12 * std::max(1.0, std::abs(fmax));
  Slope out{slopes[0], slopes[0]};
  bool first = true;
  for (int i = 0; i < 4; ++i) {
    if (fmax - values[i] <= tol) {
      if (first) {
        out = {slopes[i], slopes[i]};
        first = false;
      } else {
        out.lo = std::min(out.lo, slopes[i]);
        out.hi = std::max(out.hi, slopes[i]);
      }
    }
  }
  return out;
}

BalanceDecision better_of(const LoadSnapshot& s, const DataNodeLoad& j, double b,
                          std::uint64_t lo, std::uint64_t hi, FormulaFidelity fidelity) {
  const double f_lo = batch_completion(s, j, b, static_cast<double>(lo), fidelity);
  const double f_hi = batch_completion(s, j, b, static_cast<double>(hi), fidelity);
  if (f_hi <= f_lo) return {hi, f_hi};  // ties keep work at the data node
  return {lo, f_lo};
}

}  // namespace

BalanceDecision solve_d(const LoadSnapshot& s, const DataNodeLoad& j, std::uint64_t b,
                        std::mt19937_64& rng, FormulaFidelity fidelity) {
  const double db = static_cast<double>(b);
  std::uniform_real_distribution<double> start(0.0, db);
  double d = start(rng);
  double step = db / 8.0;
  double prev_dir = 0.0;
  for (int iter = 0; iter < 64 && step > 0.0; ++iter) {
    const Slope g = active_slope(s, j, db, d, fidelity);
    if (g.lo <= 0.0 && g.hi >= 0.0) break;  // subgradient straddles zero: at the minimum
    const double dir = g.hi < 0.0 ? 1.0 : -1.0;
    if (prev_dir != 0.0 && dir != prev_dir) step *= 0.5;
    prev_dir = dir;
    d = std::clamp(d + dir * step, 0.0, db);
  }
  const auto lo = static_cast<std::uint64_t>(std::floor(d));
  const auto hi = std::min<std::uint64_t>(b, static_cast<std::uint64_t>(std::ceil(d)));
  return better_of(s, j, db, lo, hi, fidelity);
}

BalanceDecision solve_d_exact(const LoadSnapshot& s, const DataNodeLoad& j, std::uint64_t b,
                              FormulaFidelity fidelity) {
  const double db = static_cast<double>(b);
  BalanceDecision best{0, batch_completion(s, j, db, 0.0, fidelity)};
  for (std::uint64_t d = 1; d <= b; ++d) {
    const double f = batch_completion(s, j, db, static_cast<double>(d), fidelity);
    if (f <= best.predicted_completion) best = {d, f};
  }
  return best;
}

std::uint64_t snapshot_wire_bytes(std::uint64_t base_overhead, std::uint64_t per_field) {
  return base_overhead + per_field * LoadSnapshot::kFieldCount;
}

}  // namespace pushsim
