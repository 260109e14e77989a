#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "alert/alert_policy.hpp"
#include "alert/estimator.hpp"
#include "alert/predictor.hpp"
#include "alert/selector.hpp"
#include "alert/simulator.hpp"

namespace alert {

/// Every (model, cap, target stage) in ascending order.
inline std::vector<ConfigDecision> enumerate_configs(const ConfigSpace& space) {
  std::vector<ConfigDecision> out;
  for (std::size_t i = 0; i < space.dnns.size(); ++i) {
    const std::size_t stages = space.dnns[i].is_anytime() ? space.dnns[i].stage_count() : 1;
    for (std::size_t j = 0; j < space.powers.size(); ++j)
      for (std::size_t k = 1; k <= stages; ++k) {
        ConfigDecision d;
        d.dnn_index = i;
        d.power_index = j;
        d.target_stage = k;
        d.prediction.dnn_index = i;
        d.prediction.power_index = j;
        d.prediction.target_stage = k;
        out.push_back(d);
      }
  }
  return out;
}

/// Always runs the same configuration.
class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(ConfigDecision decision, std::string name = "fixed")
      : decision_(decision), name_(std::move(name)) {}
  [[nodiscard]] std::string name() const override { return name_; }
  ConfigDecision decide(const DecisionContext&) override { return decision_; }

 private:
  ConfigDecision decision_;
  std::string name_;
};

namespace detail {

/// Strict preference between two measured outcomes: fewer broken constraints
/// first (latency, then accuracy, then energy), then the objective, then the
/// selector's tie order.
inline bool prefer_outcome(const StepRecord& a, const StepRecord& b, Mode mode) {
  const auto& va = a.violations;
  const auto& vb = b.violations;
  if (va.any() != vb.any()) return !va.any();
  if (va.latency != vb.latency) return !va.latency;
  if (va.accuracy != vb.accuracy) return !va.accuracy;
  if (va.energy != vb.energy) return !va.energy;
  if (mode == Mode::MinimizeEnergy) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.delivered_accuracy != b.delivered_accuracy)
      return a.delivered_accuracy > b.delivered_accuracy;
  } else {
    if (a.delivered_accuracy != b.delivered_accuracy)
      return a.delivered_accuracy > b.delivered_accuracy;
    if (a.energy != b.energy) return a.energy < b.energy;
  }
  const auto& da = a.decision;
  const auto& db = b.decision;
  return std::tie(da.power_index, da.dnn_index, da.target_stage) <
         std::tie(db.power_index, db.dnn_index, db.target_stage);
}

inline FallbackLevel fallback_for(const ViolationFlags& v) {
  if (v.accuracy) return FallbackLevel::DroppedAccuracy;
  if (v.energy) return FallbackLevel::DroppedEnergy;
  return FallbackLevel::None;
}

}  // namespace detail

/// Clairvoyant per-input optimum: tries every configuration against the true
/// slow-down of the coming input and keeps the best measured outcome.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(const ConfigSpace& space, std::span<const InputEnvironment> env)
      : env_(env.begin(), env.end()), configs_(enumerate_configs(space)) {}

  [[nodiscard]] std::string name() const override { return "oracle"; }

  ConfigDecision decide(const DecisionContext& ctx) override {
    const auto& e = env_.at(ctx.input_index);
    std::optional<StepRecord> best;
    for (const auto& cand : configs_) {
      const auto outcome = execute(cand, ctx.space, e.slowdown, ctx.t_goal);
      StepRecord rec = measure(cand, outcome, ctx.space, ctx.spec, e.idle_power, ctx.period);
      if (ctx.deadline_infeasible) rec.violations.latency = true;
      if (!best || detail::prefer_outcome(rec, *best, ctx.spec.mode)) best = rec;
    }
    ConfigDecision d = best->decision;
    d.prediction.latency_mean = best->observed_latency;
    d.prediction.latency_sigma = 0.0;
    d.prediction.pr_deadline = best->deadline_met ? 1.0 : 0.0;
    d.prediction.expected_accuracy = best->delivered_accuracy;
    d.prediction.energy = best->energy;
    d.feasible = !best->violations.any();
    d.fallback_level = detail::fallback_for(best->violations);
    return d;
  }

 private:
  std::vector<InputEnvironment> env_;
  std::vector<ConfigDecision> configs_;
};

struct StaticOracleResult {
  ConfigDecision decision;
  /// At least one configuration broke each constraint on at most 10% of inputs.
  bool eligible = false;
  Summary summary;
};

/// Best single configuration for the whole trace. A configuration is eligible
/// when each constraint is violated on at most `max_violation_rate` of the
/// inputs; the eligible one with the best mean objective wins, otherwise the
/// one with the fewest violating inputs.
inline StaticOracleResult oracle_static_decision(const ConfigSpace& space,
                                                 const ConstraintSpec& spec, const Trace& trace,
                                                 std::span<const InputEnvironment> env,
                                                 const RunOptions& options = {},
                                                 double max_violation_rate = 0.10) {
  std::optional<StaticOracleResult> best_eligible;
  std::optional<StaticOracleResult> fewest_violations;
  for (const auto& cand : enumerate_configs(space)) {
    FixedPolicy fixed(cand);
    const auto result = run(space, spec, trace, env, fixed, options);
    const auto& s = result.summary.overall;
    const bool eligible = s.latency_violation_rate <= max_violation_rate &&
                          s.accuracy_violation_rate <= max_violation_rate &&
                          s.energy_violation_rate <= max_violation_rate;
    const double obj = objective(s, spec.mode);
    if (eligible &&
        (!best_eligible || obj < objective(best_eligible->summary.overall, spec.mode)))
      best_eligible = StaticOracleResult{cand, true, result.summary};
    if (!fewest_violations ||
        s.any_violation_rate < fewest_violations->summary.overall.any_violation_rate ||
        (s.any_violation_rate == fewest_violations->summary.overall.any_violation_rate &&
         obj < objective(fewest_violations->summary.overall, spec.mode)))
      fewest_violations = StaticOracleResult{cand, false, result.summary};
  }
  return best_eligible ? *best_eligible : *fewest_violations;
}

namespace detail {

/// Cap with the lowest predicted energy whose mean predicted latency fits the
/// window; the highest cap when none fits.
inline std::size_t cheapest_power_meeting_deadline(const ConfigSpace& space,
                                                   const ControllerState& est,
                                                   std::size_t dnn_index, std::size_t stage,
                                                   double window) {
  const auto& st = space.dnns[dnn_index].stages[stage - 1];
  std::optional<std::size_t> best;
  double best_energy = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < space.powers.size(); ++j) {
    if (est.slowdown.mu * st.t_prof[j] > window) continue;
    const double e = predict_energy_mean(est.slowdown, est.idle, space.powers[j].cap_watts,
                                         st.t_prof[j], window);
    if (e < best_energy) {
      best_energy = e;
      best = j;
    }
  }
  return best.value_or(space.default_power_index());
}

inline std::size_t most_accurate_anytime(const ConfigSpace& space) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < space.dnns.size(); ++i)
    if (space.dnns[i].is_anytime() &&
        (!best || space.dnns[i].best_accuracy() > space.dnns[*best].best_accuracy()))
      best = i;
  if (!best) throw std::invalid_argument("profile has no anytime model");
  return *best;
}

inline ConfigDecision decision_for(const DecisionContext& ctx, const ControllerState& est,
                                   std::size_t dnn, std::size_t power, std::size_t stage) {
  ConfigDecision d;
  d.dnn_index = dnn;
  d.power_index = power;
  d.target_stage = stage;
  d.prediction =
      predict_config(ctx.space, est.slowdown, est.idle, ctx.spec, ctx.t_goal, dnn, power, stage);
  d.feasible = detail::meets_all(d.prediction, ctx.spec);
  return d;
}

}  // namespace detail

/// System-only adaptation: the fastest traditional model, with the power cap
/// chosen by the slow-down filter to meet the deadline at least energy.
class SysOnlyPolicy final : public Policy {
 public:
  explicit SysOnlyPolicy(const ConfigSpace& space) {
    const auto idx = fastest_dnn_index(space, space.default_power_index(), DnnKind::Traditional);
    if (!idx) throw std::invalid_argument("sys-only: profile has no traditional model");
    dnn_ = *idx;
  }
  [[nodiscard]] std::string name() const override { return "sys-only"; }

  ConfigDecision decide(const DecisionContext& ctx) override {
    const std::size_t power =
        detail::cheapest_power_meeting_deadline(ctx.space, ctx.estimates, dnn_, 1, ctx.t_goal);
    return detail::decision_for(ctx, ctx.estimates, dnn_, power, 1);
  }

 private:
  std::size_t dnn_ = 0;
};

/// Application-only adaptation: one anytime model at the default (highest)
/// cap, target stage chosen for the highest expected accuracy.
class AppOnlyPolicy final : public Policy {
 public:
  explicit AppOnlyPolicy(const ConfigSpace& space) : dnn_(detail::most_accurate_anytime(space)) {}
  [[nodiscard]] std::string name() const override { return "app-only"; }

  ConfigDecision decide(const DecisionContext& ctx) override {
    const std::size_t power = ctx.space.default_power_index();
    const auto& dnn = ctx.space.dnns[dnn_];
    std::size_t stage = 1;
    double best = -1.0;
    for (std::size_t k = 1; k <= dnn.stage_count(); ++k) {
      const double acc =
          expected_accuracy_anytime(ctx.estimates.slowdown, dnn, power, k, ctx.t_goal);
      if (acc >= best) {
        best = acc;
        stage = k;
      }
    }
    return detail::decision_for(ctx, ctx.estimates, dnn_, power, stage);
  }

 private:
  std::size_t dnn_;
};

/// Both adaptations without coordination. The application picks the anytime
/// target stage assuming the cap in force last time; the system picks the cap
/// assuming the stage in force last time. Each keeps its own estimator.
class NoCoordPolicy final : public Policy {
 public:
  explicit NoCoordPolicy(const ConfigSpace& space, const RunOptions& options = {})
      : dnn_(detail::most_accurate_anytime(space)),
        stage_(space.dnns[dnn_].stage_count()),
        power_(space.default_power_index()) {
    const ControllerState init{
        slowdown_init(options.slowdown),
        idle_power_init(space.p_idle_prof / space.powers.back().cap_watts, options.idle)};
    app_ = init;
    sys_ = init;
  }
  [[nodiscard]] std::string name() const override { return "no-coord"; }

  ConfigDecision decide(const DecisionContext& ctx) override {
    const auto& dnn = ctx.space.dnns[dnn_];

    // Application level, at the last known cap.
    std::size_t stage = dnn.stage_count();
    if (ctx.spec.mode == Mode::MinimizeEnergy && ctx.spec.q_goal) {
      for (std::size_t k = 1; k <= dnn.stage_count(); ++k)
        if (expected_accuracy_anytime(app_.slowdown, dnn, power_, k, ctx.t_goal) >=
            *ctx.spec.q_goal) {
          stage = k;
          break;
        }
    }

    // System level, for the last known stage.
    const std::size_t power =
        detail::cheapest_power_meeting_deadline(ctx.space, sys_, dnn_, stage_, ctx.t_goal);

    return detail::decision_for(ctx, sys_, dnn_, power, stage);
  }

  void observe(const StepRecord& rec) override {
    stage_ = rec.decision.target_stage;
    power_ = rec.decision.power_index;
    for (auto* est : {&app_, &sys_}) {
      est->slowdown = slowdown_update(est->slowdown, rec.xi_latency, rec.xi_t_prof);
      est->idle = idle_power_update(est->idle, rec.idle_power, rec.cap_watts);
    }
  }

 private:
  std::size_t dnn_;
  std::size_t stage_;
  std::size_t power_;
  ControllerState app_;
  ControllerState sys_;
};

}  // namespace alert
