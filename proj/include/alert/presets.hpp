#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alert/simulator.hpp"

namespace alert::presets {

// Calibration knobs for the built-in contention scenarios. The magnitudes
// are chosen for the synthetic profiles; they are not hardware measurements.
inline constexpr double kSteadyIdleWatts = 5.0;
inline constexpr double kMemoryMean = 1.8;
inline constexpr double kMemorySd = 0.3;
inline constexpr double kMemoryIdleWatts = 9.0;
inline constexpr double kComputeMean = 1.4;
inline constexpr double kComputeSd = 0.1;
inline constexpr double kComputeIdleWatts = 7.0;
inline constexpr double kJitter = 0.03;

inline EnvironmentPhase steady(std::size_t length) {
  return {length, ConstantDist{1.0}, kSteadyIdleWatts, kJitter};
}

/// Memory-bound co-runner: heavy-tailed slow-down.
inline EnvironmentPhase memory(std::size_t length) {
  return {length, lognormal_from_moments(kMemoryMean, kMemorySd), kMemoryIdleWatts, kJitter};
}

/// Compute-bound co-runner. `lognormal` swaps the Gaussian for a log-normal
/// with the same mean and variance.
inline EnvironmentPhase compute(std::size_t length, bool lognormal = false) {
  EnvironmentPhase p{length, GaussianDist{kComputeMean, kComputeSd}, kComputeIdleWatts, kJitter};
  if (lognormal) p.dist = lognormal_from_moments(kComputeMean, kComputeSd);
  return p;
}

/// Replaces every Gaussian phase with a log-normal of equal mean and variance.
inline Trace with_lognormal_phases(Trace trace) {
  for (auto& p : trace.phases)
    if (const auto* g = std::get_if<GaussianDist>(&p.dist))
      p.dist = lognormal_from_moments(g->mean, g->sd);
  return trace;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"steady",  "dynamic", "dynamic-lognormal",
                                          "memory",  "compute", "compute-lognormal"};
  return n;
}

/// Built-in traces. "dynamic" is three 200-input phases: no contention,
/// memory contention, compute contention.
inline Trace trace(std::string_view name, std::uint64_t seed = 1) {
  Trace t;
  t.seed = seed;
  if (name == "steady") {
    t.phases = {steady(600)};
  } else if (name == "dynamic") {
    t.phases = {steady(200), memory(200), compute(200)};
  } else if (name == "dynamic-lognormal") {
    t.phases = {steady(200), memory(200), compute(200, true)};
  } else if (name == "memory") {
    t.phases = {steady(300), memory(300)};
  } else if (name == "compute") {
    t.phases = {steady(300), compute(300)};
  } else if (name == "compute-lognormal") {
    t.phases = {steady(300), compute(300, true)};
  } else {
    throw std::invalid_argument("unknown preset trace '" + std::string(name) + "'");
  }
  return t;
}

/// The dynamic traces used for cross-policy comparisons.
inline std::vector<std::string> suite() { return {"dynamic", "memory", "compute"}; }

}  // namespace alert::presets
