#pragma once

#include <cstdint>
#include <random>

#include "pushsim/types.hpp"

namespace pushsim {

// The printed compCPU formula multiplies work executed at the compute node by
// the data node's per-function time; Corrected uses the compute node's own
// time for that work.
enum class FormulaFidelity { Corrected, Printed };

struct SizeProfile {
  double s_k = 0.0;
  double s_p = 0.0;
  double s_v = 0.0;
  double s_cv = 0.0;
};

// Compute-node statistics piggybacked on each request batch.
struct LoadSnapshot {
  double pending_local = 0.0;           // lc: queued local computations
  double pending_data_sends = 0.0;      // nd: data requests not yet sent
  double pending_compute_sends = 0.0;   // nc: compute requests not yet sent
  double pending_data_responses = 0.0;  // ndr: data responses outstanding
  double pending_remote_other = 0.0;    // nr_bar: compute requests outstanding at nodes != j
  double expected_remote_other = 0.0;   // r_bar: portion of nr_bar expected to be computed remotely
  double tc_compute = 0.0;              // seconds per function at the compute node
  SizeProfile sizes;
  double net_bw = 0.0;  // effective bytes/second at the compute node

  static constexpr int kFieldCount = 12;
};

// Data-node-local statistics at batch arrival (excluding the batch itself).
struct DataNodeLoad {
  double pending_data_requests = 0.0;       // nd_j: from all compute nodes
  double pending_data_responses = 0.0;      // ndr_j
  double pending_compute_total = 0.0;       // nr_j
  double expected_local_total = 0.0;        // r_j: portion computed at the data node
  double pending_compute_from_origin = 0.0; // nr_ij
  double expected_local_from_origin = 0.0;  // r_ij
  double tc_data = 0.0;                     // seconds per function at the data node
  SizeProfile sizes;
  double net_bw = 0.0;
};

struct BalanceDecision {
  std::uint64_t d = 0;
  double predicted_completion = 0.0;
};

double comp_cpu(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d,
                FormulaFidelity fidelity = FormulaFidelity::Corrected);
double comp_net(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d);
double data_cpu(const DataNodeLoad& j, double d);
double data_net(const DataNodeLoad& j, double b, double d);

// max of the four loads: the predicted completion time for the batch.
double batch_completion(const LoadSnapshot& s, const DataNodeLoad& j, double b, double d,
                        FormulaFidelity fidelity = FormulaFidelity::Corrected);

// Picks d in [0,b] minimizing batch_completion by gradient descent on the
// continuous relaxation from a random start, then rounding.  Ties prefer the
// larger d (keep work at the data node).
BalanceDecision solve_d(const LoadSnapshot& s, const DataNodeLoad& j, std::uint64_t b,
                        std::mt19937_64& rng,
                        FormulaFidelity fidelity = FormulaFidelity::Corrected);

// Exhaustive scan over d in {0..b}; the test oracle and an optional
// configuration choice.
BalanceDecision solve_d_exact(const LoadSnapshot& s, const DataNodeLoad& j, std::uint64_t b,
                              FormulaFidelity fidelity = FormulaFidelity::Corrected);

// Wire size of a serialized snapshot.
std::uint64_t snapshot_wire_bytes(std::uint64_t base_overhead = 64,
                                  std::uint64_t per_field = 8);

}  // namespace pushsim
