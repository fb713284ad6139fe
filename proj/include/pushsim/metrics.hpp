#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushsim/types.hpp"
#include "pushsim/workload.hpp"

namespace pushsim {

struct Metrics {
  Strategy strategy = Strategy::NO;
  Preset preset = Preset::DH;
  double zipf_z = 0.0;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Batch;
  bool adaptive = true;

  std::uint64_t tuples = 0;
  std::uint64_t resolved = 0;
  double completion_s = 0.0;
  double throughput_tps = 0.0;

  // Request mix (compute-node side).
  std::uint64_t mem_hits = 0;
  std::uint64_t disk_hits = 0;
  std::uint64_t data_requests = 0;
  std::uint64_t compute_requests = 0;
  std::uint64_t first_compute_requests = 0;
  std::uint64_t computed_at_data = 0;
  std::uint64_t raw_returned = 0;
  std::uint64_t local_computes = 0;

  // Cache behaviour.
  std::uint64_t mem_evictions = 0;
  std::uint64_t disk_evictions = 0;
  std::uint64_t promotions = 0;
  std::uint64_t invalidations = 0;
  std::uint64_t counter_resets = 0;
  std::uint64_t update_notifications = 0;
  double aging_floor = 0.0;

  double mean_latency_s = 0.0;
  double max_latency_s = 0.0;
  std::uint64_t event_hash = 0;

  // Busy fractions in [0,1], indexed by global node id.
  std::uint32_t n_compute = 0;
  std::uint32_t n_data = 0;
  std::vector<double> cpu_busy;
  std::vector<double> disk_busy;
  std::vector<double> link_out_busy;
  std::vector<double> link_in_busy;

  double max_data_cpu_busy() const;
  double mean_data_cpu_busy() const;
};

// Stable CSV layout; per-node columns are suffixed c0..cN / d0..dM.
std::string metrics_csv_header(std::uint32_t n_compute, std::uint32_t n_data,
                               bool normalized_column);
std::string metrics_csv_row(const Metrics& m, bool normalized_column,
                            double normalized_value = 0.0);

void write_metrics_csv(std::ostream& out, const std::vector<Metrics>& rows,
                       const std::vector<std::string>& header_comments);

std::string format_double(double v);

}  // namespace pushsim
