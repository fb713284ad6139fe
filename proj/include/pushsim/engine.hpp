#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pushsim/balance.hpp"
#include "pushsim/cache.hpp"
#include "pushsim/costs.hpp"
#include "pushsim/frequency.hpp"
#include "pushsim/metrics.hpp"
#include "pushsim/sim.hpp"
#include "pushsim/skirental.hpp"
#include "pushsim/types.hpp"
#include "pushsim/workload.hpp"

namespace pushsim {

struct EngineConfig {
  Strategy strategy = Strategy::FO;
  bool adaptive = true;            // false: freeze rent/buy decisions after the cutoff
  double freeze_fraction = 0.10;

  std::size_t batch_size = 64;
  double batch_max_wait = 0.010;   // seconds
  std::size_t max_inflight = 256;  // outstanding prefetches per compute node (batch mode)

  double alpha = 0.3;
  double epsilon = 0.001;
  std::uint64_t mem_cache_bytes = 16000000;
  std::uint64_t disk_cache_bytes = 0;  // 0 = unbounded
  double benefit_weight = 1.0;
  FormulaFidelity fidelity = FormulaFidelity::Corrected;
  bool exact_balance = false;  // use the exhaustive d solver instead of gradient descent

  double warmup_fraction = 0.10;           // stream mode measurement warmup
  std::uint64_t event_budget_per_tuple = 2000;

  void validate() const;
};

struct StrategyTraits {
  enum class Route { Data, Compute, Coin, Adaptive };
  bool batching;
  bool caching;
  bool balancing;
  Route route;

  static StrategyTraits of(Strategy s);
};

// One simulated execution: the compute-node pipeline (dispatch, batching,
// prefetch window, result map) against the data-node handler (store lookup,
// batch execution with load balancing, statistics piggybacking, update
// notifications).
class Engine {
 public:
  enum class EntryKindTag : std::uint8_t { Data, Compute };

  struct BatchEntry {
    EntryKindTag kind;
    std::uint64_t tuple_id;
    KeyId key;
    std::uint32_t param_bytes;
    Tier dest_tier;   // data entries: which cache tier the fetch targets
    bool will_cache;  // data entries issued by the rent/buy policy
  };

  struct ResponseEntry {
    std::uint64_t tuple_id;
    KeyId key;
    bool computed;
    bool from_balancing;  // raw return of a compute request
    Tier dest_tier;
    bool will_cache;
    std::uint64_t value_version;
    std::uint64_t value_bytes;    // stored size (cost feedback, all entries)
    std::uint64_t result_bytes;   // computed entries
    double measured_tc;           // computed entries: wall time at the data node
    double measured_tdisk;
    SimTime last_update_ts;
  };

  struct Batcher {
    std::vector<BatchEntry> entries;
    SimTime first_enqueue = 0.0;
    std::uint64_t arm_seq = 0;
  };

  struct PendingTuple {
    std::uint64_t tuple_id;
    KeyId key;
    SimTime submitted;
  };

  struct ComputeNode {
    NodeId id = 0;
    CostParams costs;
    LossyCounter freq{0.001};
    TieredCache cache{1, 0, TieredCache::SizeMode::Uniform};
    std::mt19937_64 rng;
    std::deque<WorkloadTuple> input;
    std::uint64_t input_total = 0;
    std::deque<PendingTuple> map_queue;
    std::unordered_set<std::uint64_t> resolved;
    std::uint64_t consumed = 0;
    std::uint64_t inflight = 0;
    std::uint64_t dispatched = 0;
    std::vector<Batcher> batchers;  // one per data node
    // pending statistics for load snapshots
    std::uint64_t lc = 0;
    std::uint64_t nd_unsent = 0;
    std::uint64_t nc_unsent = 0;
    std::uint64_t ndr = 0;
    std::vector<std::uint64_t> nr_pending;
    std::vector<SmoothedEstimate> remote_frac;
    std::unordered_map<KeyId, SimTime> last_seen_ts;
    // metrics
    std::uint64_t mem_hits = 0, disk_hits = 0;
    std::uint64_t data_requests = 0, compute_requests = 0, first_compute_requests = 0;
    std::uint64_t local_computes = 0, invalidations = 0, counter_resets = 0;
    double latency_sum = 0.0, latency_max = 0.0;
    SimTime last_consume = 0.0;
    std::uint64_t warm_consumed = 0;
  };

  struct DataNode {
    NodeId id = 0;
    std::uint32_t index = 0;
    std::mt19937_64 rng;
    std::unordered_map<KeyId, std::uint64_t> version;
    std::unordered_map<KeyId, SimTime> updated_at;
    std::unordered_map<KeyId, std::set<NodeId>> fetched_by;
    std::uint64_t nd_j = 0;
    std::uint64_t ndr_j = 0;
    std::uint64_t nr_j = 0;
    double r_j = 0.0;
    std::vector<std::uint64_t> nr_ij;
    std::vector<double> r_ij;
    SmoothedEstimate tc_here;
    double s_v_estimate = 0.0;
    double s_cv_estimate = 0.0;
    std::uint64_t computed_count = 0, raw_count = 0, updates = 0, notifications = 0;
  };

  struct ResolvedRecord {
    std::uint64_t tuple_id;
    KeyId key;
    std::uint64_t version;
    NodeId computed_at;
  };

  Engine(Simulator& sim, const WorkloadGen& workload, const EngineConfig& cfg,
         std::uint64_t seed);

  // Batch mode: distributes the trace round-robin and fills each node's
  // prefetch window.
  void start_batch(const std::vector<WorkloadTuple>& trace);
  // Stream mode: schedules arrivals at the spec's rate for its duration.
  void start_stream(const std::vector<WorkloadTuple>& trace);

  Metrics collect(double elapsed) const;
  bool all_consumed() const;
  std::string backlog_report() const;

  ComputeNode& compute_node(std::uint32_t i) { return compute_[i]; }
  DataNode& data_node(std::uint32_t j) { return data_[j]; }
  const std::vector<ResolvedRecord>& resolution_trace() const { return resolution_trace_; }
  void enable_resolution_trace() { trace_resolutions_ = true; }

  // Direct entry points, also used by the unit tests.
  void pre_map(ComputeNode& cn, const WorkloadTuple& t);
  void dispatch(ComputeNode& cn, const WorkloadTuple& t);
  void flush(ComputeNode& cn, std::uint32_t dest_index);
  void apply_update(DataNode& dn, KeyId k);

 private:
  void submit_next(ComputeNode& cn);
  void enqueue_entry(ComputeNode& cn, std::uint32_t dest_index, BatchEntry entry);
  void route_adaptive(ComputeNode& cn, const WorkloadTuple& t);
  void local_compute(ComputeNode& cn, const WorkloadTuple& t, std::uint64_t version,
                     bool from_disk_tier);
  void local_compute_value(ComputeNode& cn, std::uint64_t tuple_id, KeyId key,
                           std::uint64_t version);
  void start_cpu_job(ComputeNode& cn, std::uint64_t tuple_id, KeyId key, std::uint64_t version,
                     SimTime ready_at);
  void deliver_batch(DataNode& dn, NodeId origin, std::vector<BatchEntry> entries,
                     std::optional<LoadSnapshot> snapshot, std::uint64_t wire_bytes);
  void handle_response(ComputeNode& cn, NodeId data_node,
                       std::vector<ResponseEntry> entries);
  void resolve(ComputeNode& cn, std::uint64_t tuple_id, KeyId key, std::uint64_t version,
               NodeId computed_at);
  void on_invalidate(ComputeNode& cn, KeyId k, SimTime ts);
  void schedule_next_update();
  LoadSnapshot build_snapshot(const ComputeNode& cn, std::uint32_t dest_index) const;
  DataNodeLoad build_data_load(const DataNode& dn, NodeId origin) const;
  bool frozen(const ComputeNode& cn) const;
  std::uint64_t stored_version(DataNode& dn, KeyId k) const;
  double egress_bandwidth(NodeId node) const;

  Simulator& sim_;
  const WorkloadGen& workload_;
  EngineConfig cfg_;
  StrategyTraits traits_;
  std::uint64_t seed_;
  std::vector<ComputeNode> compute_;
  std::vector<DataNode> data_;
  std::mt19937_64 update_rng_;
  std::optional<ZipfSampler> update_sampler_;
  SimTime stream_end_ = 0.0;
  bool stream_mode_ = false;
  bool trace_resolutions_ = false;
  std::vector<ResolvedRecord> resolution_trace_;
};

struct SimStallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs one full simulation to quiescence (batch) or for the configured
// duration (stream).  Identical (spec, workload, config, seed) inputs produce
// bit-identical metrics.  A replay trace overrides workload generation so one
// trace can be shared across strategies.
Metrics run_simulation(const ClusterSpec& cluster, const WorkloadSpec& workload,
                       const EngineConfig& cfg, std::uint64_t seed,
                       EventLogMode log_mode = EventLogMode::Off,
                       const std::vector<WorkloadTuple>* replay_trace = nullptr,
                       std::vector<LogRecord>* event_log_out = nullptr);

}  // namespace pushsim
