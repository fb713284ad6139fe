#include "pushsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pushsim {

Preset preset_from_name(const std::string& name) {
  if (name == "dh" || name == "DH") return Preset::DH;
  if (name == "ch" || name == "CH") return Preset::CH;
  if (name == "dch" || name == "DCH") return Preset::DCH;
  if (name == "custom") return Preset::Custom;
  throw ConfigError("unknown workload preset: " + name);
}

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::DH: return "dh";
    case Preset::CH: return "ch";
    case Preset::DCH: return "dch";
    case Preset::Custom: return "custom";
  }
  return "??";
}

void WorkloadSpec::apply_preset() {
  switch (preset) {
    case Preset::DH:
      s_v_bytes = 100000;
      tc_seconds = 0.0001;
      break;
    case Preset::CH:
      s_v_bytes = 1000;
      tc_seconds = 0.1;
      break;
    case Preset::DCH:
      s_v_bytes = 100000;
      tc_seconds = 0.1;
      break;
    case Preset::Custom:
      break;
  }
}

void WorkloadSpec::validate() const {
  if (universe == 0) throw ConfigError("workload: key universe must be positive");
  if (zipf_z < 0.0) throw ConfigError("workload: zipf_z must be >= 0");
  if (mode == RunMode::Batch && n_tuples == 0) throw ConfigError("workload: no tuples");
  if (mode == RunMode::Stream && (arrival_rate <= 0.0 || duration <= 0.0))
    throw ConfigError("workload: stream mode needs a positive rate and duration");
  if (s_v_bytes == 0 || s_k_bytes == 0) throw ConfigError("workload: zero record sizes");
  if (tc_seconds <= 0.0) throw ConfigError("workload: compute time must be positive");
  if (s_v_spread_bytes >= s_v_bytes) throw ConfigError("workload: size spread too large");
  if (update_rate < 0.0) throw ConfigError("workload: negative update rate");
}

ZipfSampler::ZipfSampler(std::uint64_t universe, double z) {
  cdf_.resize(universe);
  double total = 0.0;
  for (std::uint64_t i = 0; i < universe; ++i) {
    total += z == 0.0 ? 1.0 : std::pow(static_cast<double>(i + 1), -z);
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
}

double ZipfSampler::mass(std::uint64_t rank) const {
  if (rank == 0 || rank > cdf_.size()) return 0.0;
  return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

WorkloadGen::WorkloadGen(const WorkloadSpec& spec, std::uint64_t seed)
    : spec_(spec), seed_(seed) {
  spec_.validate();
}

std::vector<WorkloadTuple> WorkloadGen::generate() const {
  std::uint64_t count = spec_.n_tuples;
  if (spec_.mode == RunMode::Stream)
    count = static_cast<std::uint64_t>(spec_.arrival_rate * spec_.duration) + 1;
  ZipfSampler zipf(spec_.universe, spec_.zipf_z);
  std::mt19937_64 rng(mix64(seed_));
  std::vector<WorkloadTuple> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t rank = zipf.sample(rng);
    out.push_back({i, rank - 1, static_cast<std::uint32_t>(spec_.s_p_bytes)});
  }
  return out;
}

KeyProperties WorkloadGen::key_props(KeyId k) const {
  std::uint64_t bytes = spec_.s_v_bytes;
  if (spec_.s_v_spread_bytes > 0) {
    // Deterministic per-key size, independent of access order.
    const std::uint64_t h = mix64(k ^ mix64(seed_ + 0x5157));
    const std::uint64_t spread = 2 * spec_.s_v_spread_bytes + 1;
    bytes = spec_.s_v_bytes - spec_.s_v_spread_bytes + h % spread;
  }
  return {bytes, spec_.tc_seconds};
}

std::vector<WorkloadTuple> apply_drift(const WorkloadSpec& spec,
                                       std::vector<WorkloadTuple> stream,
                                       std::uint64_t seed) {
  if (spec.drift_shifts == 0 || stream.empty()) return stream;
  const std::uint64_t segments = spec.drift_shifts + 1;
  const std::uint64_t seg_len = (stream.size() + segments - 1) / segments;
  std::vector<KeyId> perm(spec.universe);
  for (std::uint64_t seg = 1; seg < segments; ++seg) {
    std::iota(perm.begin(), perm.end(), KeyId{0});
    std::mt19937_64 rng(mix64(seed ^ (0xd41f7 + seg)));
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::uint64_t begin = seg * seg_len;
    const std::uint64_t end = std::min<std::uint64_t>(stream.size(), begin + seg_len);
    for (std::uint64_t i = begin; i < end; ++i) stream[i].key = perm[stream[i].key];
  }
  return stream;
}

void dump_trace(const std::vector<WorkloadTuple>& trace, std::ostream& out) {
  for (const auto& t : trace)
    out << t.tuple_id << ' ' << t.key << ' ' << t.param_bytes << '\n';
}

std::vector<WorkloadTuple> load_trace(std::istream& in) {
  std::vector<WorkloadTuple> out;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    WorkloadTuple t{};
    if (!(ss >> t.tuple_id >> t.key >> t.param_bytes))
      throw ConfigError("trace line " + std::to_string(lineno) + ": expected 3 fields");
    out.push_back(t);
  }
  return out;
}

}  // namespace pushsim
