#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "pushsim/types.hpp"

namespace pushsim {

enum class RunMode { Batch, Stream };
enum class Preset { DH, CH, DCH, Custom };

Preset preset_from_name(const std::string& name);
const char* preset_name(Preset p);

struct WorkloadTuple {
  std::uint64_t tuple_id;
  KeyId key;
  std::uint32_t param_bytes;
};

struct WorkloadSpec {
  RunMode mode = RunMode::Batch;
  std::uint64_t n_tuples = 100000;   // batch mode
  double arrival_rate = 10000.0;     // stream mode, tuples/second across the cluster
  double duration = 10.0;            // stream mode, seconds
  std::uint64_t universe = 10000;
  double zipf_z = 0.0;
  Preset preset = Preset::DH;

  // Resolved per-preset parameters (overridable for Custom).
  std::uint64_t s_v_bytes = 100000;
  double tc_seconds = 0.0001;
  std::uint64_t s_p_bytes = 64;
  std::uint64_t s_cv_bytes = 128;
  std::uint64_t s_k_bytes = 16;
  std::uint64_t s_v_spread_bytes = 0;  // +/- uniform per-key size spread (variable sizes)

  std::uint32_t drift_shifts = 0;
  double update_rate = 0.0;  // store updates per second of simulated time

  void apply_preset();
  void validate() const;
};

// Per-key stored properties; the store itself carries no skew.
struct KeyProperties {
  std::uint64_t value_bytes;
  double compute_seconds;
};

// Deterministic Zipf(z) sampler over ranks 1..universe (z = 0 is uniform).
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t universe, double z);
  std::uint64_t sample(std::mt19937_64& rng) const;  // 1-based rank
  double mass(std::uint64_t rank) const;             // exact probability of a rank

 private:
  std::vector<double> cdf_;
};

class WorkloadGen {
 public:
  WorkloadGen(const WorkloadSpec& spec, std::uint64_t seed);

  // Batch trace; keys are Zipf ranks mapped to key ids (identity before drift).
  std::vector<WorkloadTuple> generate() const;

  KeyProperties key_props(KeyId k) const;
  const WorkloadSpec& spec() const { return spec_; }

 private:
  WorkloadSpec spec_;
  std::uint64_t seed_;
};

// Splits the stream into drift_shifts+1 equal segments and re-permutes the
// rank-to-key mapping at each boundary (new heavy hitters, same shape).
std::vector<WorkloadTuple> apply_drift(const WorkloadSpec& spec,
                                       std::vector<WorkloadTuple> stream,
                                       std::uint64_t seed);

// Line-delimited trace replay: "tuple_id key param_bytes".
void dump_trace(const std::vector<WorkloadTuple>& trace, std::ostream& out);
std::vector<WorkloadTuple> load_trace(std::istream& in);

}  // namespace pushsim
