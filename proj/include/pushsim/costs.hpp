#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pushsim/types.hpp"

namespace pushsim {

// Exponentially smoothed runtime measurement:
//   current <- alpha * measured + (1 - alpha) * current
struct SmoothedEstimate {
  double current = 0.0;
  double alpha = 0.3;

  void update(double measured);
};

SmoothedEstimate smooth_update(SmoothedEstimate est, double measured);

// Per compute node cost state: static link bandwidths plus the runtime-measured
// disk, CPU and size estimates used by the rent/buy decision.  Per-key value
// sizes and per-key compute times shadow the global averages once a response
// for the key has been seen.
struct CostParams {
  // netBw[i][j]: effective bytes/second from node i to node j.
  std::vector<std::vector<double>> net_bw;
  double s_k = 0.0;  // average key bytes
  double s_p = 0.0;  // average parameter bytes

  std::vector<SmoothedEstimate> t_disk;  // seconds per record fetch, per node
  std::vector<SmoothedEstimate> t_cpu;   // seconds per invocation, per node
  SmoothedEstimate s_v_avg;              // average stored-value bytes
  SmoothedEstimate s_cv_avg;             // average computed-result bytes

  std::unordered_map<KeyId, double> s_v_by_key;
  std::unordered_map<KeyId, SmoothedEstimate> t_cpu_by_key;

  bool knows_key(KeyId k) const { return s_v_by_key.count(k) > 0; }
  double value_size(KeyId k) const;
  double cpu_time(KeyId k, NodeId node) const;
  double bandwidth(NodeId from, NodeId to) const;

  void record_value_size(KeyId k, double bytes);
  void record_computed_size(double bytes);
  void record_cpu_time(KeyId k, NodeId node, double seconds);
  void record_disk_time(NodeId node, double seconds);

  void validate() const;
};

// The four decision costs for one (key, compute node, data node) triple.
// t_rec_disk >= t_rec_mem by construction.
struct DecisionCosts {
  DecisionCosts(double compute, double fetch, double rec_mem, double rec_disk);

  double t_compute;
  double t_fetch;
  double t_rec_mem;
  double t_rec_disk;
};

//   tCompute = max(tDisk_j, (s_k+s_p+s_cv)/netBw_ij, tc_j)
//   tFetch   = max(tDisk_j, (s_k+s_v)/netBw_ij)
//   tRecMem  = tc_i
//   tRecDisk = max(tc_i, tDisk_i)
DecisionCosts decision_costs(const CostParams& params, KeyId key, NodeId compute_node,
                             NodeId data_node);

}  // namespace pushsim
