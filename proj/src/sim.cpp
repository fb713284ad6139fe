#include "pushsim/sim.hpp"

#include <algorithm>
#include <cstring>

namespace pushsim {

double ClusterSpec::disk_time(NodeId n) const {
  if (!t_disk_per_node.empty()) return t_disk_per_node.at(n);
  return t_disk;
}

double ClusterSpec::speed(NodeId n) const {
  if (!cpu_speed_per_node.empty()) return cpu_speed_per_node.at(n);
  return cpu_speed;
}

double ClusterSpec::bandwidth(NodeId from, NodeId to) const {
  if (!net_bw_matrix.empty()) return net_bw_matrix.at(from).at(to);
  return net_bw;
}

std::vector<std::vector<double>> ClusterSpec::full_bandwidth_matrix() const {
  if (!net_bw_matrix.empty()) return net_bw_matrix;
  return std::vector<std::vector<double>>(n_nodes(), std::vector<double>(n_nodes(), net_bw));
}

NodeId ClusterSpec::owner_of(KeyId k, std::uint64_t universe) const {
  if (partition == Partition::Hash) return data_node_id(mix64(k) % n_data);
  const std::uint64_t span = (universe + n_data - 1) / n_data;
  return data_node_id(static_cast<std::uint32_t>(std::min<std::uint64_t>(k / span, n_data - 1)));
}

void ClusterSpec::validate() const {
  if (n_compute == 0 || n_data == 0) throw ConfigError("cluster: need compute and data nodes");
  if (net_bw_matrix.empty()) {
    if (!(net_bw > 0.0)) throw ConfigError("cluster: bandwidth must be positive");
  } else {
    if (net_bw_matrix.size() != n_nodes()) throw ConfigError("cluster: bandwidth matrix shape");
    for (const auto& row : net_bw_matrix) {
      if (row.size() != n_nodes()) throw ConfigError("cluster: bandwidth matrix shape");
      for (double bw : row)
        if (!(bw > 0.0)) throw ConfigError("cluster: bandwidth must be positive");
    }
  }
  if (!t_disk_per_node.empty() && t_disk_per_node.size() != n_nodes())
    throw ConfigError("cluster: t_disk_per_node shape");
  for (double t : t_disk_per_node)
    if (!(t > 0.0)) throw ConfigError("cluster: disk time must be positive");
  if (t_disk_per_node.empty() && !(t_disk > 0.0))
    throw ConfigError("cluster: disk time must be positive");
  if (!cpu_speed_per_node.empty() && cpu_speed_per_node.size() != n_nodes())
    throw ConfigError("cluster: cpu_speed_per_node shape");
  if (handling_seconds < 0.0) throw ConfigError("cluster: negative handling cost");
}

Simulator::Simulator(const ClusterSpec& spec, EventLogMode log_mode)
    : spec_(spec), log_mode_(log_mode) {
  spec_.validate();
  cpu_.resize(spec_.n_nodes());
  disk_.resize(spec_.n_nodes());
  link_out_.resize(spec_.n_nodes());
  link_in_.resize(spec_.n_nodes());
}

void Simulator::at(SimTime when, std::function<void()> fn) {
  queue_.push(Event{std::max(when, now_), next_seq_++, std::move(fn)});
}

bool Simulator::run(std::uint64_t max_events) {
  while (!queue_.empty()) {
    if (events_processed_ >= max_events) return false;
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.at;
    ++events_processed_;
    ev.fn();
  }
  return true;
}

bool Simulator::run_until(SimTime until, std::uint64_t max_events) {
  while (!queue_.empty() && queue_.top().at <= until) {
    if (events_processed_ >= max_events) return false;
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.at;
    ++events_processed_;
    ev.fn();
  }
  now_ = std::max(now_, until);
  return true;
}

SimTime Simulator::serve(Server& s, double duration) {
  const SimTime start = std::max(now_, s.busy_until);
  s.busy_until = start + duration;
  s.busy_time += duration;
  ++s.jobs;
  return s.busy_until;
}

SimTime Simulator::serve_cpu(NodeId n, double duration) { return serve(cpu_.at(n), duration); }

SimTime Simulator::serve_disk(NodeId n, double duration) { return serve(disk_.at(n), duration); }

SimTime Simulator::transfer(NodeId from, NodeId to, double bytes) {
  Server& out = link_out_.at(from);
  Server& in = link_in_.at(to);
  const double duration = bytes / spec_.bandwidth(from, to);
  const SimTime start = std::max({now_, out.busy_until, in.busy_until});
  out.busy_until = in.busy_until = start + duration;
  out.busy_time += duration;
  in.busy_time += duration;
  ++out.jobs;
  ++in.jobs;
  return start + duration;
}

void Simulator::log(NodeId node, LogKind kind, KeyId key, std::uint64_t bytes) {
  if (log_mode_ == EventLogMode::Off) return;
  const LogRecord rec{now_, node, kind, key, bytes};
  auto mix = [&](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      log_hash_ ^= c[i];
      log_hash_ *= 1099511628211ULL;  // FNV-1a prime
    }
  };
  mix(&rec.at, sizeof(rec.at));
  mix(&rec.node, sizeof(rec.node));
  mix(&rec.kind, sizeof(rec.kind));
  mix(&rec.key, sizeof(rec.key));
  mix(&rec.bytes, sizeof(rec.bytes));
  if (log_mode_ == EventLogMode::Full) log_.push_back(rec);
}

}  // namespace pushsim
