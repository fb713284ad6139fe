#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pushsim {

using KeyId = std::uint64_t;
using NodeId = std::uint32_t;
using SimTime = double;  // seconds

enum class Tier { Memory, Disk };

// Execution policies compared in the evaluation harness.
enum class Strategy { NO, FC, FD, FR, CO, LO, FO };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::NO: return "NO";
    case Strategy::FC: return "FC";
    case Strategy::FD: return "FD";
    case Strategy::FR: return "FR";
    case Strategy::CO: return "CO";
    case Strategy::LO: return "LO";
    case Strategy::FO: return "FO";
  }
  return "??";
}

inline Strategy strategy_from_name(const std::string& name) {
  if (name == "NO") return Strategy::NO;
  if (name == "FC") return Strategy::FC;
  if (name == "FD") return Strategy::FD;
  if (name == "FR") return Strategy::FR;
  if (name == "CO") return Strategy::CO;
  if (name == "LO") return Strategy::LO;
  if (name == "FO") return Strategy::FO;
  throw std::invalid_argument("unknown strategy: " + name);
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Stable 64-bit mix used wherever a process-independent hash is needed
// (key partitioning, per-node rng seeding).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace pushsim
