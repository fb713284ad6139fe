#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "pushsim/types.hpp"

namespace pushsim {

enum class Partition { Hash, Range };

struct ClusterSpec {
  std::uint32_t n_compute = 4;
  std::uint32_t n_data = 4;
  double net_bw = 10e6;  // bytes/second, uniform default
  std::vector<std::vector<double>> net_bw_matrix;  // optional full [node][node] override
  double t_disk = 0.002;                 // seconds per record fetch
  std::vector<double> t_disk_per_node;   // optional per-node override
  double cpu_speed = 1.0;                // service time multiplier (1.0 = nominal)
  std::vector<double> cpu_speed_per_node;
  std::uint64_t msg_overhead_bytes = 64;
  std::uint64_t snapshot_base_bytes = 64;
  std::uint64_t snapshot_field_bytes = 8;
  double handling_seconds = 0.0;  // per-entry request handling CPU at a data node
  Partition partition = Partition::Hash;

  std::uint32_t n_nodes() const { return n_compute + n_data; }
  // Global node ids: compute nodes 0..n_compute-1, data nodes follow.
  NodeId data_node_id(std::uint32_t j) const { return n_compute + j; }
  double disk_time(NodeId n) const;
  double speed(NodeId n) const;
  double bandwidth(NodeId from, NodeId to) const;
  std::vector<std::vector<double>> full_bandwidth_matrix() const;
  NodeId owner_of(KeyId k, std::uint64_t universe) const;  // data node id
  void validate() const;
};

enum class LogKind : std::uint8_t {
  TupleSubmit,
  Dispatch,
  Flush,
  Deliver,
  DiskDone,
  CpuDone,
  Resolve,
  Consume,
  Update,
  Invalidate,
};

struct LogRecord {
  SimTime at;
  NodeId node;
  LogKind kind;
  KeyId key;
  std::uint64_t bytes;
};

enum class EventLogMode { Off, HashOnly, Full };

// Deterministic event scheduler plus FIFO rate servers for each node's CPU,
// disk and link endpoints.  Events at equal timestamps run in scheduling
// order.  Service completions are computed at submission time, which is exact
// for FIFO servers with known service demands.
class Simulator {
 public:
  explicit Simulator(const ClusterSpec& spec, EventLogMode log_mode = EventLogMode::Off);

  SimTime now() const { return now_; }
  const ClusterSpec& cluster() const { return spec_; }

  void at(SimTime when, std::function<void()> fn);

  // Runs until the queue empties or max_events is hit; returns false on the
  // event-budget diagnostic.
  bool run(std::uint64_t max_events);
  // Runs events with timestamp <= until.
  bool run_until(SimTime until, std::uint64_t max_events);

  struct Server {
    SimTime busy_until = 0.0;
    double busy_time = 0.0;
    std::uint64_t jobs = 0;
  };

  // Serves one job of the given duration; returns its completion time.
  SimTime serve_cpu(NodeId n, double duration);
  SimTime serve_disk(NodeId n, double duration);
  // Occupies the sender egress and receiver ingress ports for bytes/bandwidth;
  // returns the delivery time.
  SimTime transfer(NodeId from, NodeId to, double bytes);

  const Server& cpu(NodeId n) const { return cpu_[n]; }
  const Server& disk(NodeId n) const { return disk_[n]; }
  const Server& link_out(NodeId n) const { return link_out_[n]; }
  const Server& link_in(NodeId n) const { return link_in_[n]; }

  void log(NodeId node, LogKind kind, KeyId key, std::uint64_t bytes);
  std::uint64_t event_log_hash() const { return log_hash_; }
  const std::vector<LogRecord>& event_log() const { return log_; }
  std::uint64_t events_processed() const { return events_processed_; }

 private:
  SimTime serve(Server& s, double duration);

  struct Event {
    SimTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  ClusterSpec spec_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t events_processed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<Server> cpu_, disk_, link_out_, link_in_;

  EventLogMode log_mode_;
  std::vector<LogRecord> log_;
  std::uint64_t log_hash_ = 1469598103934665603ULL;  // FNV-1a offset basis
};

}  // namespace pushsim
