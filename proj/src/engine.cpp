#include "pushsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pushsim {

void EngineConfig::validate() const {
  if (batch_size == 0) throw ConfigError("engine: batch_size must be positive");
  if (batch_max_wait < 0.0) throw ConfigError("engine: negative batch_max_wait");
  if (max_inflight == 0) throw ConfigError("engine: max_inflight must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("engine: alpha must be in (0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("engine: epsilon must be in (0,1)");
  if (mem_cache_bytes == 0) throw ConfigError("engine: mem cache must be positive");
  if (!(freeze_fraction > 0.0 && freeze_fraction <= 1.0))
    throw ConfigError("engine: freeze_fraction must be in (0,1]");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw ConfigError("engine: warmup_fraction must be in [0,1)");
}

StrategyTraits StrategyTraits::of(Strategy s) {
  switch (s) {
    case Strategy::NO: return {false, false, false, Route::Data};
    case Strategy::FC: return {true, false, false, Route::Data};
    case Strategy::FD: return {true, false, false, Route::Compute};
    case Strategy::FR: return {true, false, false, Route::Coin};
    case Strategy::CO: return {true, true, false, Route::Adaptive};
    case Strategy::LO: return {true, false, true, Route::Compute};
    case Strategy::FO: return {true, true, true, Route::Adaptive};
  }
  throw ConfigError("unknown strategy");
}

Engine::Engine(Simulator& sim, const WorkloadGen& workload, const EngineConfig& cfg,
               std::uint64_t seed)
    : sim_(sim),
      workload_(workload),
      cfg_(cfg),
      traits_(StrategyTraits::of(cfg.strategy)),
      seed_(seed),
      update_rng_(mix64(seed ^ 0xa11ce)) {
  cfg_.validate();
  const ClusterSpec& cluster = sim_.cluster();
  const WorkloadSpec& spec = workload_.spec();

  if (!traits_.batching) {
    cfg_.batch_size = 1;
    cfg_.max_inflight = 1;
  }

  compute_.resize(cluster.n_compute);
  for (std::uint32_t i = 0; i < cluster.n_compute; ++i) {
    ComputeNode& cn = compute_[i];
    cn.id = i;
    cn.rng.seed(mix64(seed ^ (0xc0 + i)));
    cn.freq = LossyCounter(cfg_.epsilon);
    cn.cache = TieredCache(cfg_.mem_cache_bytes, cfg_.disk_cache_bytes,
                           spec.s_v_spread_bytes == 0 ? TieredCache::SizeMode::Uniform
                                                      : TieredCache::SizeMode::Variable);
    cn.batchers.resize(cluster.n_data);
    cn.nr_pending.assign(cluster.n_data, 0);
    cn.remote_frac.assign(cluster.n_data, SmoothedEstimate{1.0, cfg_.alpha});
    // Cost estimates initialized once from the setup measurements, then
    // updated from responses.
    cn.costs.net_bw = cluster.full_bandwidth_matrix();
    cn.costs.s_k = static_cast<double>(spec.s_k_bytes);
    cn.costs.s_p = static_cast<double>(spec.s_p_bytes);
    cn.costs.t_disk.assign(cluster.n_nodes(), SmoothedEstimate{0.0, cfg_.alpha});
    cn.costs.t_cpu.assign(cluster.n_nodes(), SmoothedEstimate{0.0, cfg_.alpha});
    for (NodeId n = 0; n < cluster.n_nodes(); ++n) {
      cn.costs.t_disk[n] = SmoothedEstimate{cluster.disk_time(n), cfg_.alpha};
      cn.costs.t_cpu[n] = SmoothedEstimate{spec.tc_seconds * cluster.speed(n), cfg_.alpha};
    }
    cn.costs.s_v_avg = SmoothedEstimate{static_cast<double>(spec.s_v_bytes), cfg_.alpha};
    cn.costs.s_cv_avg = SmoothedEstimate{static_cast<double>(spec.s_cv_bytes), cfg_.alpha};
  }

  data_.resize(cluster.n_data);
  for (std::uint32_t j = 0; j < cluster.n_data; ++j) {
    DataNode& dn = data_[j];
    dn.id = cluster.data_node_id(j);
    dn.index = j;
    dn.rng.seed(mix64(seed ^ (0xda7a + j)));
    dn.nr_ij.assign(cluster.n_compute, 0);
    dn.r_ij.assign(cluster.n_compute, 0.0);
    dn.tc_here = SmoothedEstimate{spec.tc_seconds * cluster.speed(dn.id), cfg_.alpha};
    dn.s_v_estimate = static_cast<double>(spec.s_v_bytes);
    dn.s_cv_estimate = static_cast<double>(spec.s_cv_bytes);
  }

  if (spec.update_rate > 0.0) {
    update_sampler_.emplace(spec.universe, spec.zipf_z);
    schedule_next_update();
  }
}

void Engine::start_batch(const std::vector<WorkloadTuple>& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    compute_[i % compute_.size()].input.push_back(trace[i]);
  for (auto& cn : compute_) {
    cn.input_total = cn.input.size();
    while (cn.inflight < cfg_.max_inflight && !cn.input.empty()) submit_next(cn);
  }
}

void Engine::start_stream(const std::vector<WorkloadTuple>& trace) {
  stream_mode_ = true;
  const WorkloadSpec& spec = workload_.spec();
  stream_end_ = spec.duration;
  const double gap = 1.0 / spec.arrival_rate;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const SimTime when = static_cast<double>(i) * gap;
    if (when >= spec.duration) break;
    ComputeNode& cn = compute_[i % compute_.size()];
    ++cn.input_total;
    const WorkloadTuple t = trace[i];
    sim_.at(when, [this, &cn, t] { pre_map(cn, t); });
  }
}

void Engine::submit_next(ComputeNode& cn) {
  if (cn.input.empty()) return;
  const WorkloadTuple t = cn.input.front();
  cn.input.pop_front();
  pre_map(cn, t);
}

void Engine::pre_map(ComputeNode& cn, const WorkloadTuple& t) {
  ++cn.inflight;
  sim_.log(cn.id, LogKind::TupleSubmit, t.key, 0);
  dispatch(cn, t);
  cn.map_queue.push_back({t.tuple_id, t.key, sim_.now()});
}

bool Engine::frozen(const ComputeNode& cn) const {
  if (cfg_.adaptive) return false;
  return static_cast<double>(cn.dispatched) >
         cfg_.freeze_fraction * static_cast<double>(cn.input_total);
}

void Engine::dispatch(ComputeNode& cn, const WorkloadTuple& t) {
  ++cn.dispatched;
  sim_.log(cn.id, LogKind::Dispatch, t.key, 0);
  const std::uint32_t dest = sim_.cluster().owner_of(t.key, workload_.spec().universe) -
                             sim_.cluster().n_compute;
  switch (traits_.route) {
    case StrategyTraits::Route::Data:
      ++cn.data_requests;
      enqueue_entry(cn, dest,
                    {EntryKindTag::Data, t.tuple_id, t.key, t.param_bytes, Tier::Memory, false});
      return;
    case StrategyTraits::Route::Compute:
      ++cn.compute_requests;
      enqueue_entry(cn, dest, {EntryKindTag::Compute, t.tuple_id, t.key, t.param_bytes,
                               Tier::Memory, false});
      return;
    case StrategyTraits::Route::Coin: {
      std::uniform_int_distribution<int> coin(0, 1);
      if (coin(cn.rng) == 0) {
        ++cn.data_requests;
        enqueue_entry(cn, dest, {EntryKindTag::Data, t.tuple_id, t.key, t.param_bytes,
                                 Tier::Memory, false});
      } else {
        ++cn.compute_requests;
        enqueue_entry(cn, dest, {EntryKindTag::Compute, t.tuple_id, t.key, t.param_bytes,
                                 Tier::Memory, false});
      }
      return;
    }
    case StrategyTraits::Route::Adaptive:
      route_adaptive(cn, t);
      return;
  }
}

// skiRentalCaching: benefit and counter updates, cache lookup, then the
// rent/buy checks against the memory- and disk-tier recurring costs.
void Engine::route_adaptive(ComputeNode& cn, const WorkloadTuple& t) {
  const KeyId k = t.key;
  const std::uint64_t count = cn.freq.observe(k);
  cn.cache.update_benefit(k, count, cfg_.benefit_weight);

  if (auto hit = cn.cache.get(k)) {
    if (hit->tier == Tier::Memory)
      ++cn.mem_hits;
    else
      ++cn.disk_hits;
    local_compute(cn, t, hit->value, hit->tier == Tier::Disk);
    return;
  }

  const std::uint32_t dest_index =
      sim_.cluster().owner_of(k, workload_.spec().universe) - sim_.cluster().n_compute;
  auto send_compute = [&] {
    ++cn.compute_requests;
    enqueue_entry(cn, dest_index, {EntryKindTag::Compute, t.tuple_id, k, t.param_bytes,
                                   Tier::Memory, false});
  };
  auto send_data = [&](Tier tier) {
    ++cn.data_requests;
    enqueue_entry(cn, dest_index,
                  {EntryKindTag::Data, t.tuple_id, k, t.param_bytes, tier, true});
  };

  if (frozen(cn)) {
    send_compute();
    return;
  }
  if (!cn.costs.knows_key(k)) {
    // No cost parameters yet: the first request is always a compute request.
    ++cn.first_compute_requests;
    send_compute();
    return;
  }

  const NodeId owner = sim_.cluster().data_node_id(dest_index);
  const DecisionCosts dc = decision_costs(cn.costs, k, cn.id, owner);
  const auto size = static_cast<std::uint64_t>(cn.costs.value_size(k));

  // When fetching and computing locally is cheaper per request than renting,
  // buying dominates outright.
  if (dc.t_fetch + dc.t_rec_mem <= dc.t_compute) {
    send_data(cn.cache.cond_cache(k, std::nullopt, size) ? Tier::Memory : Tier::Disk);
    return;
  }

  if (decide({dc.t_compute, dc.t_fetch, dc.t_rec_mem}, count) == SkiDecision::Rent) {
    send_compute();
    return;
  }
  if (cn.cache.cond_cache(k, std::nullopt, size)) {
    send_data(Tier::Memory);
    return;
  }
  if (decide({dc.t_compute, dc.t_fetch, dc.t_rec_disk}, count) == SkiDecision::Rent) {
    send_compute();
    return;
  }
  send_data(Tier::Disk);
}

void Engine::local_compute(ComputeNode& cn, const WorkloadTuple& t, std::uint64_t version,
                           bool from_disk_tier) {
  ++cn.lc;
  ++cn.local_computes;
  if (from_disk_tier) {
    const double t_disk = sim_.cluster().disk_time(cn.id);
    const SimTime done = sim_.serve_disk(cn.id, t_disk);
    cn.costs.record_disk_time(cn.id, t_disk);
    sim_.log(cn.id, LogKind::DiskDone, t.key, 0);
    start_cpu_job(cn, t.tuple_id, t.key, version, done);
  } else {
    start_cpu_job(cn, t.tuple_id, t.key, version, sim_.now());
  }
}

void Engine::local_compute_value(ComputeNode& cn, std::uint64_t tuple_id, KeyId key,
                                 std::uint64_t version) {
  ++cn.lc;
  ++cn.local_computes;
  start_cpu_job(cn, tuple_id, key, version, sim_.now());
}

void Engine::start_cpu_job(ComputeNode& cn, std::uint64_t tuple_id, KeyId key,
                           std::uint64_t version, SimTime ready_at) {
  const double service = workload_.key_props(key).compute_seconds * sim_.cluster().speed(cn.id);
  sim_.at(ready_at, [this, &cn, tuple_id, key, version, service] {
    const SimTime enqueued = sim_.now();
    const SimTime done = sim_.serve_cpu(cn.id, service);
    sim_.at(done, [this, &cn, tuple_id, key, version, enqueued] {
      cn.costs.record_cpu_time(key, cn.id, sim_.now() - enqueued);
      --cn.lc;
      sim_.log(cn.id, LogKind::CpuDone, key, 0);
      resolve(cn, tuple_id, key, version, cn.id);
    });
  });
}

void Engine::enqueue_entry(ComputeNode& cn, std::uint32_t dest_index, BatchEntry entry) {
  Batcher& b = cn.batchers[dest_index];
  if (b.entries.empty()) {
    b.first_enqueue = sim_.now();
    const std::uint64_t seq = ++b.arm_seq;
    if (cfg_.batch_size > 1 && cfg_.batch_max_wait > 0.0) {
      sim_.at(sim_.now() + cfg_.batch_max_wait, [this, &cn, dest_index, seq] {
        if (cn.batchers[dest_index].arm_seq == seq && !cn.batchers[dest_index].entries.empty())
          flush(cn, dest_index);
      });
    }
  }
  if (entry.kind == EntryKindTag::Data)
    ++cn.nd_unsent;
  else
    ++cn.nc_unsent;
  b.entries.push_back(entry);
  if (b.entries.size() >= cfg_.batch_size) flush(cn, dest_index);
}

void Engine::flush(ComputeNode& cn, std::uint32_t dest_index) {
  Batcher& b = cn.batchers[dest_index];
  if (b.entries.empty()) return;
  ++b.arm_seq;  // cancel any armed timer
  std::vector<BatchEntry> entries = std::move(b.entries);
  b.entries.clear();

  std::uint64_t n_data = 0, n_compute = 0;
  std::uint64_t wire = sim_.cluster().msg_overhead_bytes;
  for (const auto& e : entries) {
    if (e.kind == EntryKindTag::Data) {
      ++n_data;
      wire += workload_.spec().s_k_bytes;
    } else {
      ++n_compute;
      wire += workload_.spec().s_k_bytes + e.param_bytes;
    }
  }
  cn.nd_unsent -= n_data;
  cn.nc_unsent -= n_compute;
  cn.ndr += n_data;

  std::optional<LoadSnapshot> snapshot;
  if (traits_.balancing) {
    snapshot = build_snapshot(cn, dest_index);
    wire += snapshot_wire_bytes(sim_.cluster().snapshot_base_bytes,
                                sim_.cluster().snapshot_field_bytes);
  }
  cn.nr_pending[dest_index] += n_compute;

  DataNode& dn = data_[dest_index];
  sim_.log(cn.id, LogKind::Flush, entries.front().key, wire);
  const SimTime delivered = sim_.transfer(cn.id, dn.id, static_cast<double>(wire));
  const NodeId origin = cn.id;
  sim_.at(delivered, [this, &dn, origin, entries = std::move(entries), snapshot,
                      wire]() mutable {
    sim_.log(dn.id, LogKind::Deliver, entries.front().key, wire);
    deliver_batch(dn, origin, std::move(entries), snapshot, wire);
  });
}

LoadSnapshot Engine::build_snapshot(const ComputeNode& cn, std::uint32_t dest_index) const {
  LoadSnapshot s;
  s.pending_local = static_cast<double>(cn.lc);
  s.pending_data_sends = static_cast<double>(cn.nd_unsent);
  s.pending_compute_sends = static_cast<double>(cn.nc_unsent);
  s.pending_data_responses = static_cast<double>(cn.ndr);
  for (std::uint32_t j = 0; j < cn.nr_pending.size(); ++j) {
    if (j == dest_index) continue;
    const double nr = static_cast<double>(cn.nr_pending[j]);
    s.pending_remote_other += nr;
    s.expected_remote_other += cn.remote_frac[j].current * nr;
  }
  s.tc_compute = cn.costs.t_cpu[cn.id].current;
  s.sizes = {cn.costs.s_k, cn.costs.s_p, cn.costs.s_v_avg.current, cn.costs.s_cv_avg.current};
  s.net_bw = egress_bandwidth(cn.id);
  return s;
}

DataNodeLoad Engine::build_data_load(const DataNode& dn, NodeId origin) const {
  DataNodeLoad j;
  j.pending_data_requests = static_cast<double>(dn.nd_j);
  j.pending_data_responses = static_cast<double>(dn.ndr_j);
  j.pending_compute_total = static_cast<double>(dn.nr_j);
  j.expected_local_total = dn.r_j;
  j.pending_compute_from_origin = static_cast<double>(dn.nr_ij[origin]);
  j.expected_local_from_origin = dn.r_ij[origin];
  j.tc_data = dn.tc_here.current;
  j.sizes = {static_cast<double>(workload_.spec().s_k_bytes),
             static_cast<double>(workload_.spec().s_p_bytes), dn.s_v_estimate,
             dn.s_cv_estimate};
  j.net_bw = egress_bandwidth(dn.id);
  return j;
}

double Engine::egress_bandwidth(NodeId node) const {
  const ClusterSpec& c = sim_.cluster();
  double sum = 0.0;
  std::uint32_t count = 0;
  for (NodeId other = 0; other < c.n_nodes(); ++other) {
    if (other == node) continue;
    sum += c.bandwidth(node, other);
    ++count;
  }
  return sum / count;
}

std::uint64_t Engine::stored_version(DataNode& dn, KeyId k) const {
  auto it = dn.version.find(k);
  return it == dn.version.end() ? 0 : it->second;
}

void Engine::deliver_batch(DataNode& dn, NodeId origin, std::vector<BatchEntry> entries,
                           std::optional<LoadSnapshot> snapshot, std::uint64_t /*wire_bytes*/) {
  std::uint64_t n_data = 0, n_compute = 0;
  for (const auto& e : entries)
    e.kind == EntryKindTag::Data ? ++n_data : ++n_compute;

  // d is chosen against the load excluding this batch; the batch itself
  // enters the estimate through the b and d terms.
  std::uint64_t d = n_compute;
  if (traits_.balancing && n_compute > 0 && snapshot) {
    const DataNodeLoad load = build_data_load(dn, origin);
    const BalanceDecision choice =
        cfg_.exact_balance ? solve_d_exact(*snapshot, load, n_compute, cfg_.fidelity)
                           : solve_d(*snapshot, load, n_compute, dn.rng, cfg_.fidelity);
    d = choice.d;
  }
  dn.nd_j += n_data;
  dn.nr_j += n_compute;
  dn.nr_ij[origin] += n_compute;
  dn.r_j += static_cast<double>(d);
  dn.r_ij[origin] += static_cast<double>(d);

  auto pending = std::make_shared<std::uint64_t>(entries.size());
  auto responses = std::make_shared<std::vector<ResponseEntry>>(entries.size());
  const std::uint64_t d_taken = d;
  const double t_disk = sim_.cluster().disk_time(dn.id);

  std::uint64_t compute_seen = 0;
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    const BatchEntry e = entries[idx];
    const bool execute_here =
        e.kind == EntryKindTag::Compute && (compute_seen++ < d_taken);

    ResponseEntry r{};
    r.tuple_id = e.tuple_id;
    r.key = e.key;
    r.computed = execute_here;
    r.from_balancing = e.kind == EntryKindTag::Compute && !execute_here;
    r.dest_tier = e.dest_tier;
    r.will_cache = e.will_cache;
    r.value_version = stored_version(dn, e.key);
    r.value_bytes = workload_.key_props(e.key).value_bytes;
    r.result_bytes = workload_.spec().s_cv_bytes;
    r.measured_tdisk = t_disk;
    auto up = dn.updated_at.find(e.key);
    r.last_update_ts = up == dn.updated_at.end() ? 0.0 : up->second;
    (*responses)[idx] = r;

    if (e.will_cache) dn.fetched_by[e.key].insert(origin);

    auto finish_entry = [this, &dn, origin, pending, responses, n_data, n_compute,
                         d_taken](std::size_t slot, double measured_tc) {
      (*responses)[slot].measured_tc = measured_tc;
      ++dn.ndr_j;
      if (--(*pending) == 0) {
        // Single response message per batch, sent when the slowest entry is done.
        std::uint64_t bytes = sim_.cluster().msg_overhead_bytes;
        for (const auto& rr : *responses) {
          if (rr.computed)
            bytes += rr.result_bytes;
          else
            bytes += rr.value_bytes + (rr.from_balancing ? workload_.spec().s_p_bytes : 0);
        }
        dn.nd_j -= n_data;
        dn.nr_j -= n_compute;
        dn.nr_ij[origin] -= n_compute;
        dn.r_j -= static_cast<double>(d_taken);
        dn.r_ij[origin] -= static_cast<double>(d_taken);
        dn.ndr_j -= responses->size();
        const SimTime delivered = sim_.transfer(dn.id, origin, static_cast<double>(bytes));
        sim_.at(delivered, [this, origin, responses] {
          handle_response(compute_[origin], 0, std::move(*responses));
        });
      }
    };

    // Service chain: optional request handling on the CPU, the store fetch on
    // the disk, then the function execution for entries kept here.
    auto after_handling = [this, &dn, idx, e, execute_here, t_disk, finish_entry] {
      const SimTime fetched = sim_.serve_disk(dn.id, t_disk);
      sim_.log(dn.id, LogKind::DiskDone, e.key, 0);
      if (!execute_here) {
        sim_.at(fetched, [finish_entry, idx] { finish_entry(idx, 0.0); });
        return;
      }
      const double service =
          workload_.key_props(e.key).compute_seconds * sim_.cluster().speed(dn.id);
      sim_.at(fetched, [this, &dn, idx, e, service, finish_entry] {
        const SimTime enqueued = sim_.now();
        const SimTime done = sim_.serve_cpu(dn.id, service);
        sim_.at(done, [this, &dn, idx, e, enqueued, finish_entry] {
          const double sojourn = sim_.now() - enqueued;
          dn.tc_here.update(sojourn);
          ++dn.computed_count;
          sim_.log(dn.id, LogKind::CpuDone, e.key, 0);
          finish_entry(idx, sojourn);
        });
      });
    };

    if (sim_.cluster().handling_seconds > 0.0) {
      const SimTime handled = sim_.serve_cpu(dn.id, sim_.cluster().handling_seconds);
      sim_.at(handled, after_handling);
    } else {
      after_handling();
    }
    if (!execute_here && e.kind == EntryKindTag::Compute) ++dn.raw_count;
  }
}

void Engine::handle_response(ComputeNode& cn, NodeId /*unused*/,
                             std::vector<ResponseEntry> entries) {
  for (const auto& r : entries) {
    const std::uint32_t from_index =
        sim_.cluster().owner_of(r.key, workload_.spec().universe) - sim_.cluster().n_compute;
    if (r.from_balancing || r.computed) {
      if (cn.nr_pending[from_index] > 0) --cn.nr_pending[from_index];
      cn.remote_frac[from_index].update(r.computed ? 1.0 : 0.0);
    } else {
      if (cn.ndr > 0) --cn.ndr;
    }

    // Update-timestamp piggyback: a timestamp newer than the recorded one
    // invalidates the cached copy and restarts the counter.  The first
    // response for a key just establishes the baseline.
    auto seen = cn.last_seen_ts.find(r.key);
    if (seen == cn.last_seen_ts.end())
      cn.last_seen_ts[r.key] = r.last_update_ts;
    else if (r.last_update_ts > seen->second)
      on_invalidate(cn, r.key, r.last_update_ts);

    // Cost feedback carried by every response entry.
    cn.costs.record_value_size(r.key, static_cast<double>(r.value_bytes));
    cn.costs.record_disk_time(sim_.cluster().data_node_id(from_index), r.measured_tdisk);
    if (r.computed) {
      cn.costs.record_computed_size(static_cast<double>(r.result_bytes));
      cn.costs.record_cpu_time(r.key, sim_.cluster().data_node_id(from_index), r.measured_tc);
      resolve(cn, r.tuple_id, r.key, r.value_version, sim_.cluster().data_node_id(from_index));
      continue;
    }

    // Raw value: install if this was a rent/buy fetch, then compute locally.
    if (r.will_cache && traits_.caching) {
      if (r.dest_tier == Tier::Memory) {
        if (!cn.cache.cond_cache(r.key, r.value_version, r.value_bytes))
          cn.cache.put_disk(r.key, r.value_version, r.value_bytes);
      } else {
        cn.cache.put_disk(r.key, r.value_version, r.value_bytes);
      }
    }
    local_compute_value(cn, r.tuple_id, r.key, r.value_version);
  }
}

void Engine::resolve(ComputeNode& cn, std::uint64_t tuple_id, KeyId key, std::uint64_t version,
                     NodeId computed_at) {
  if (!cn.resolved.insert(tuple_id).second)
    throw SimStallError("tuple resolved twice: " + std::to_string(tuple_id));
  if (trace_resolutions_) resolution_trace_.push_back({tuple_id, key, version, computed_at});
  sim_.log(cn.id, LogKind::Resolve, key, version);
  if (cn.inflight > 0) --cn.inflight;

  // The map stage is a blocking in-order consumer.
  while (!cn.map_queue.empty() && cn.resolved.count(cn.map_queue.front().tuple_id)) {
    const PendingTuple& head = cn.map_queue.front();
    const double latency = sim_.now() - head.submitted;
    cn.latency_sum += latency;
    cn.latency_max = std::max(cn.latency_max, latency);
    cn.last_consume = sim_.now();
    ++cn.consumed;
    if (stream_mode_ && sim_.now() >= cfg_.warmup_fraction * stream_end_) ++cn.warm_consumed;
    sim_.log(cn.id, LogKind::Consume, head.key, 0);
    cn.map_queue.pop_front();
  }
  while (!stream_mode_ && cn.inflight < cfg_.max_inflight && !cn.input.empty()) submit_next(cn);
}

void Engine::on_invalidate(ComputeNode& cn, KeyId k, SimTime ts) {
  auto seen = cn.last_seen_ts.find(k);
  if (seen != cn.last_seen_ts.end() && seen->second >= ts) return;
  cn.last_seen_ts[k] = ts;
  cn.cache.invalidate(k);
  cn.freq.reset(k);
  ++cn.invalidations;
  ++cn.counter_resets;
  sim_.log(cn.id, LogKind::Invalidate, k, 0);
}

void Engine::apply_update(DataNode& dn, KeyId k) {
  ++dn.version[k];
  dn.updated_at[k] = sim_.now();
  ++dn.updates;
  sim_.log(dn.id, LogKind::Update, k, dn.version[k]);
  auto it = dn.fetched_by.find(k);
  if (it == dn.fetched_by.end()) return;
  const std::uint64_t bytes =
      sim_.cluster().msg_overhead_bytes + workload_.spec().s_k_bytes;
  const SimTime ts = sim_.now();
  for (NodeId i : it->second) {
    ++dn.notifications;
    const SimTime delivered = sim_.transfer(dn.id, i, static_cast<double>(bytes));
    sim_.at(delivered, [this, i, k, ts] { on_invalidate(compute_[i], k, ts); });
  }
  dn.fetched_by.erase(it);
}

void Engine::schedule_next_update() {
  std::exponential_distribution<double> gap(workload_.spec().update_rate);
  const SimTime when = sim_.now() + gap(update_rng_);
  sim_.at(when, [this] {
    const std::uint64_t rank = update_sampler_->sample(update_rng_);
    const KeyId k = rank - 1;
    const std::uint32_t j =
        sim_.cluster().owner_of(k, workload_.spec().universe) - sim_.cluster().n_compute;
    apply_update(data_[j], k);
    schedule_next_update();
  });
}

bool Engine::all_consumed() const {
  for (const auto& cn : compute_)
    if (cn.consumed != cn.input_total) return false;
  return true;
}

std::string Engine::backlog_report() const {
  std::ostringstream out;
  for (const auto& cn : compute_) {
    out << "compute " << cn.id << ": consumed " << cn.consumed << "/" << cn.input_total
        << " inflight " << cn.inflight << " map_queue " << cn.map_queue.size() << " lc "
        << cn.lc << " unsent " << (cn.nd_unsent + cn.nc_unsent) << "\n";
  }
  for (const auto& dn : data_) {
    out << "data " << dn.id << ": nd " << dn.nd_j << " nr " << dn.nr_j << " ndr " << dn.ndr_j
        << "\n";
  }
  return out.str();
}

Metrics Engine::collect(double elapsed) const {
  Metrics m;
  const ClusterSpec& c = sim_.cluster();
  m.n_compute = c.n_compute;
  m.n_data = c.n_data;
  m.strategy = cfg_.strategy;
  m.adaptive = cfg_.adaptive;
  m.preset = workload_.spec().preset;
  m.zipf_z = workload_.spec().zipf_z;
  m.mode = workload_.spec().mode;

  std::uint64_t consumed_total = 0, warm_total = 0;
  double latency_sum = 0.0;
  for (const auto& cn : compute_) {
    m.tuples += cn.input_total;
    consumed_total += cn.consumed;
    warm_total += cn.warm_consumed;
    m.mem_hits += cn.mem_hits;
    m.disk_hits += cn.disk_hits;
    m.data_requests += cn.data_requests;
    m.compute_requests += cn.compute_requests;
    m.first_compute_requests += cn.first_compute_requests;
    m.local_computes += cn.local_computes;
    m.invalidations += cn.invalidations;
    m.counter_resets += cn.counter_resets;
    m.mem_evictions += cn.cache.stats().mem_evictions;
    m.disk_evictions += cn.cache.stats().disk_evictions;
    m.promotions += cn.cache.stats().promotions;
    m.aging_floor = std::max(m.aging_floor, cn.cache.aging_floor());
    latency_sum += cn.latency_sum;
    m.max_latency_s = std::max(m.max_latency_s, cn.latency_max);
  }
  m.resolved = consumed_total;
  for (const auto& dn : data_) {
    m.computed_at_data += dn.computed_count;
    m.raw_returned += dn.raw_count;
    m.update_notifications += dn.notifications;
  }

  m.completion_s = elapsed;
  if (workload_.spec().mode == RunMode::Stream) {
    const double window = stream_end_ * (1.0 - cfg_.warmup_fraction);
    m.throughput_tps = window > 0.0 ? static_cast<double>(warm_total) / window : 0.0;
  } else {
    m.throughput_tps = elapsed > 0.0 ? static_cast<double>(consumed_total) / elapsed : 0.0;
  }
  if (consumed_total > 0) m.mean_latency_s /= static_cast<double>(consumed_total);

  const double t = std::max(elapsed, 1e-12);
  auto fraction = [&](const Simulator::Server& s) {
    return std::clamp(s.busy_time / t, 0.0, 1.0);
  };
  for (NodeId n = 0; n < c.n_nodes(); ++n) {
    m.cpu_busy.push_back(fraction(sim_.cpu(n)));
    m.disk_busy.push_back(fraction(sim_.disk(n)));
    m.link_out_busy.push_back(fraction(sim_.link_out(n)));
    m.link_in_busy.push_back(fraction(sim_.link_in(n)));
  }
  m.event_hash = sim_.event_log_hash();
  return m;
}

Metrics run_simulation(const ClusterSpec& cluster, const WorkloadSpec& workload,
                       const EngineConfig& cfg, std::uint64_t seed, EventLogMode log_mode,
                       const std::vector<WorkloadTuple>* replay_trace,
                       std::vector<LogRecord>* event_log_out) {
  cluster.validate();
  WorkloadSpec spec = workload;
  spec.validate();
  WorkloadGen gen(spec, seed);

  std::vector<WorkloadTuple> trace;
  if (replay_trace) {
    trace = *replay_trace;
  } else {
    trace = apply_drift(spec, gen.generate(), seed);
  }

  Simulator sim(cluster, log_mode);
  Engine engine(sim, gen, cfg, seed);

  const std::uint64_t budget =
      cfg.event_budget_per_tuple * std::max<std::uint64_t>(trace.size(), 1) + 1000000;
  double elapsed = 0.0;
  if (spec.mode == RunMode::Batch) {
    engine.start_batch(trace);
    if (!sim.run(budget))
      throw SimStallError("event budget exceeded\n" + engine.backlog_report());
    if (!engine.all_consumed())
      throw SimStallError("simulation stalled\n" + engine.backlog_report());
    elapsed = 0.0;
    for (std::uint32_t i = 0; i < cluster.n_compute; ++i)
      elapsed = std::max(elapsed, engine.compute_node(i).last_consume);
  } else {
    engine.start_stream(trace);
    if (!sim.run_until(spec.duration, budget))
      throw SimStallError("event budget exceeded\n" + engine.backlog_report());
    elapsed = spec.duration;
  }

  Metrics m = engine.collect(elapsed);
  m.seed = seed;
  if (event_log_out) *event_log_out = sim.event_log();
  return m;
}

}  // namespace pushsim
