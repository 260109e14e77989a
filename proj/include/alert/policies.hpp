#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alert/alert_policy.hpp"
#include "alert/baselines.hpp"
#include "alert/simulator.hpp"

namespace alert {

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"alert",         "alert-any", "alert-trad",
                                              "oracle",        "oracle-static", "sys-only",
                                              "app-only",      "no-coord"};
  return names;
}

/// Builds a policy by name. Clairvoyant policies read `env`; the static
/// oracle searches every fixed configuration over it up front.
inline std::unique_ptr<Policy> make_policy(std::string_view name, const ConfigSpace& space,
                                           const ConstraintSpec& spec, const Trace& trace,
                                           std::span<const InputEnvironment> env,
                                           const RunOptions& options = {}) {
  if (name == "alert") return std::make_unique<AlertPolicy>(space, CandidateSet::All);
  if (name == "alert-any") return std::make_unique<AlertPolicy>(space, CandidateSet::AnytimeOnly);
  if (name == "alert-trad")
    return std::make_unique<AlertPolicy>(space, CandidateSet::TraditionalOnly);
  if (name == "oracle") return std::make_unique<OraclePolicy>(space, env);
  if (name == "oracle-static") {
    const auto best = oracle_static_decision(space, spec, trace, env, options);
    return std::make_unique<FixedPolicy>(best.decision, "oracle-static");
  }
  if (name == "sys-only") return std::make_unique<SysOnlyPolicy>(space);
  if (name == "app-only") return std::make_unique<AppOnlyPolicy>(space);
  if (name == "no-coord") return std::make_unique<NoCoordPolicy>(space, options);
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

}  // namespace alert
