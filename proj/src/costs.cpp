#include "pushsim/costs.hpp"

#include <algorithm>
#include <cmath>

namespace pushsim {

void SmoothedEstimate::update(double measured) {
  if (!std::isfinite(measured) || measured < 0.0)
    throw ValidationError("smoothed estimate: measurement must be finite and non-negative");
  current = alpha * measured + (1.0 - alpha) * current;
}

SmoothedEstimate smooth_update(SmoothedEstimate est, double measured) {
  est.update(measured);
  return est;
}

double CostParams::value_size(KeyId k) const {
  auto it = s_v_by_key.find(k);
  return it != s_v_by_key.end() ? it->second : s_v_avg.current;
}

double CostParams::cpu_time(KeyId k, NodeId node) const {
  auto it = t_cpu_by_key.find(k);
  if (it != t_cpu_by_key.end()) return it->second.current;
  return t_cpu.at(node).current;
}

double CostParams::bandwidth(NodeId from, NodeId to) const {
  if (from >= net_bw.size() || to >= net_bw[from].size())
    throw ConfigError("cost params: unknown node pair");
  return net_bw[from][to];
}

void CostParams::record_value_size(KeyId k, double bytes) {
  s_v_by_key[k] = bytes;
  s_v_avg.update(bytes);
}

void CostParams::record_computed_size(double bytes) { s_cv_avg.update(bytes); }

void CostParams::record_cpu_time(KeyId k, NodeId node, double seconds) {
  auto [it, inserted] = t_cpu_by_key.try_emplace(k, SmoothedEstimate{seconds, t_cpu.at(node).alpha});
  if (!inserted) it->second.update(seconds);
  t_cpu.at(node).update(seconds);
}

void CostParams::record_disk_time(NodeId node, double seconds) {
  t_disk.at(node).update(seconds);
}

void CostParams::validate() const {
  if (net_bw.empty()) throw ConfigError("cost params: empty bandwidth matrix");
  for (const auto& row : net_bw)
    for (double bw : row)
      if (!(bw > 0.0)) throw ConfigError("cost params: bandwidth must be positive");
  if (!(s_k > 0.0) || !(s_p >= 0.0)) throw ConfigError("cost params: bad size parameters");
  for (const auto& e : t_disk)
    if (!(e.current > 0.0)) throw ConfigError("cost params: tDisk must be positive");
  for (const auto& e : t_cpu)
    if (!(e.current > 0.0)) throw ConfigError("cost params: tc must be positive");
}

DecisionCosts::DecisionCosts(double compute, double fetch, double rec_mem, double rec_disk)
    : t_compute(compute),
      t_fetch(fetch),
      t_rec_mem(rec_mem),
      t_rec_disk(std::max(rec_mem, rec_disk)) {}

DecisionCosts decision_costs(const CostParams& params, KeyId key, NodeId compute_node,
                             NodeId data_node) {
  const double bw = params.bandwidth(compute_node, data_node);
  const double t_disk_j = params.t_disk.at(data_node).current;
  const double t_disk_i = params.t_disk.at(compute_node).current;
  const double tc_j = params.cpu_time(key, data_node);
  const double tc_i = params.cpu_time(key, compute_node);
  const double s_v = params.value_size(key);

  const double t_compute =
      std::max({t_disk_j, (params.s_k + params.s_p + params.s_cv_avg.current) / bw, tc_j});
  const double t_fetch = std::max(t_disk_j, (params.s_k + s_v) / bw);
  return DecisionCosts(t_compute, t_fetch, tc_i, std::max(tc_i, t_disk_i));
}

}  // namespace pushsim
