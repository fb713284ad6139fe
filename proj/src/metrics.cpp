#include "pushsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace pushsim {

double Metrics::max_data_cpu_busy() const {
  double best = 0.0;
  for (std::uint32_t j = 0; j < n_data; ++j) best = std::max(best, cpu_busy.at(n_compute + j));
  return best;
}

double Metrics::mean_data_cpu_busy() const {
  double sum = 0.0;
  for (std::uint32_t j = 0; j < n_data; ++j) sum += cpu_busy.at(n_compute + j);
  return n_data == 0 ? 0.0 : sum / n_data;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

void append_node_columns(std::ostringstream& out, const char* name, std::uint32_t n_compute,
                         std::uint32_t n_data) {
  for (std::uint32_t i = 0; i < n_compute; ++i) out << ',' << name << "_c" << i;
  for (std::uint32_t j = 0; j < n_data; ++j) out << ',' << name << "_d" << j;
}

void append_values(std::ostringstream& out, const std::vector<double>& v) {
  for (double x : v) out << ',' << format_double(x);
}

}  // namespace

std::string metrics_csv_header(std::uint32_t n_compute, std::uint32_t n_data,
                               bool normalized_column) {
  std::ostringstream out;
  out << "strategy,preset,z,seed,mode,adaptive,tuples,resolved,completion_s,throughput_tps";
  if (normalized_column) out << ",normalized";
  out << ",mem_hits,disk_hits,data_requests,compute_requests,first_compute_requests"
      << ",computed_at_data,raw_returned,local_computes"
      << ",mem_evictions,disk_evictions,promotions,invalidations,counter_resets"
      << ",update_notifications,aging_floor,mean_latency_s,max_latency_s,event_hash";
  append_node_columns(out, "cpu_busy", n_compute, n_data);
  append_node_columns(out, "disk_busy", n_compute, n_data);
  append_node_columns(out, "link_out_busy", n_compute, n_data);
  append_node_columns(out, "link_in_busy", n_compute, n_data);
  return out.str();
}

std::string metrics_csv_row(const Metrics& m, bool normalized_column, double normalized_value) {
  std::ostringstream out;
  out << strategy_name(m.strategy) << ',' << preset_name(m.preset) << ','
      << format_double(m.zipf_z) << ',' << m.seed << ','
      << (m.mode == RunMode::Batch ? "batch" : "stream") << ',' << (m.adaptive ? 1 : 0) << ','
      << m.tuples << ',' << m.resolved << ',' << format_double(m.completion_s) << ','
      << format_double(m.throughput_tps);
  if (normalized_column) out << ',' << format_double(normalized_value);
  out << ',' << m.mem_hits << ',' << m.disk_hits << ',' << m.data_requests << ','
      << m.compute_requests << ',' << m.first_compute_requests << ',' << m.computed_at_data
      << ',' << m.raw_returned << ',' << m.local_computes << ',' << m.mem_evictions << ','
      << m.disk_evictions << ',' << m.promotions << ',' << m.invalidations << ','
      << m.counter_resets << ',' << m.update_notifications << ','
      << format_double(m.aging_floor) << ',' << format_double(m.mean_latency_s) << ','
      << format_double(m.max_latency_s);
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(m.event_hash));
  out << ',' << hash;
  append_values(out, m.cpu_busy);
  append_values(out, m.disk_busy);
  append_values(out, m.link_out_busy);
  append_values(out, m.link_in_busy);
  return out.str();
}

void write_metrics_csv(std::ostream& out, const std::vector<Metrics>& rows,
                       const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << '\n';
  if (rows.empty()) return;
  out << metrics_csv_header(rows.front().n_compute, rows.front().n_data, false) << '\n';
  for (const auto& m : rows) out << metrics_csv_row(m, false) << '\n';
}

}  // namespace pushsim
