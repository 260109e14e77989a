#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "alert/estimator.hpp"
#include "alert/model.hpp"
#include "alert/predictor.hpp"
#include "alert/selector.hpp"

namespace alert {

// ---------------------------------------------------------------------------
// Environment

struct ConstantDist {
  double value = 1.0;
};
struct GaussianDist {
  double mean = 1.0;
  double sd = 0.0;
};
struct LogNormalDist {
  double mu_log = 0.0;
  double sd_log = 0.0;
};
struct UniformDist {
  double lo = 1.0;
  double hi = 1.0;
};

using SlowdownDist = std::variant<ConstantDist, GaussianDist, LogNormalDist, UniformDist>;

inline double dist_mean(const SlowdownDist& dist) {
  struct {
    double operator()(const ConstantDist& d) const { return d.value; }
    double operator()(const GaussianDist& d) const { return d.mean; }
    double operator()(const LogNormalDist& d) const {
      return std::exp(d.mu_log + 0.5 * d.sd_log * d.sd_log);
    }
    double operator()(const UniformDist& d) const { return 0.5 * (d.lo + d.hi); }
  } visitor;
  return std::visit(visitor, dist);
}

inline double dist_sd(const SlowdownDist& dist) {
  struct {
    double operator()(const ConstantDist&) const { return 0.0; }
    double operator()(const GaussianDist& d) const { return d.sd; }
    double operator()(const LogNormalDist& d) const {
      const double s2 = d.sd_log * d.sd_log;
      return std::sqrt(std::expm1(s2)) * std::exp(d.mu_log + 0.5 * s2);
    }
    double operator()(const UniformDist& d) const { return (d.hi - d.lo) / std::sqrt(12.0); }
  } visitor;
  return std::visit(visitor, dist);
}

/// Log-normal with the given linear-scale mean and standard deviation.
inline LogNormalDist lognormal_from_moments(double mean, double sd) {
  const double s2 = std::log1p((sd * sd) / (mean * mean));
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

struct EnvironmentPhase {
  std::size_t length = 1;
  SlowdownDist dist = ConstantDist{};
  /// Power drawn while inference is idle (other tenants included), watts.
  double idle_power_true = 1.0;
  /// Per-input multiplicative jitter: s *= 1 + sd * N(0, 1).
  double input_noise_sd = 0.0;
};

struct Trace {
  std::uint64_t seed = 0;
  std::vector<EnvironmentPhase> phases;
  /// When set, consecutive groups of this many inputs share one deadline of
  /// group_size * t_goal.
  std::optional<std::size_t> group_size;

  [[nodiscard]] std::size_t total_length() const {
    std::size_t n = 0;
    for (const auto& p : phases) n += p.length;
    return n;
  }
};

inline std::vector<std::string> validate(const Trace& trace) {
  std::vector<std::string> out;
  if (trace.phases.empty()) out.emplace_back("phases: empty");
  if (trace.group_size && *trace.group_size == 0) out.emplace_back("group_size: must be >= 1");
  for (std::size_t i = 0; i < trace.phases.size(); ++i) {
    const auto& p = trace.phases[i];
    const std::string where = "phases[" + std::to_string(i) + "]";
    if (p.length == 0) out.push_back(where + ": length must be >= 1");
    if (!(p.idle_power_true > 0.0)) out.push_back(where + ": idle_power_true must be positive");
    if (!(p.input_noise_sd >= 0.0)) out.push_back(where + ": input_noise_sd negative");
    if (const auto* c = std::get_if<ConstantDist>(&p.dist); c && !(c->value > 0.0))
      out.push_back(where + ": constant slowdown must be positive");
    if (const auto* g = std::get_if<GaussianDist>(&p.dist); g && (!(g->mean > 0.0) || g->sd < 0.0))
      out.push_back(where + ": gaussian needs mean > 0 and sd >= 0");
    if (const auto* l = std::get_if<LogNormalDist>(&p.dist); l && l->sd_log < 0.0)
      out.push_back(where + ": lognormal needs sd_log >= 0");
    if (const auto* u = std::get_if<UniformDist>(&p.dist); u && !(u->lo > 0.0 && u->hi >= u->lo))
      out.push_back(where + ": uniform needs 0 < lo <= hi");
  }
  return out;
}

inline constexpr double kMinSlowdown = 0.01;

using Rng = std::mt19937_64;

/// splitmix64 finaliser over a pair; used to derive independent, stable seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Generator for input `index` of a trace. Each input has its own stream so
/// the environment does not depend on what any policy decided.
inline Rng input_rng(std::uint64_t seed, std::size_t index) {
  return Rng(mix_seed(seed, static_cast<std::uint64_t>(index)));
}

inline double draw_slowdown(const EnvironmentPhase& phase, Rng& rng) {
  struct {
    Rng& rng;
    double operator()(const ConstantDist& d) const { return d.value; }
    double operator()(const GaussianDist& d) const {
      return d.sd > 0.0 ? std::normal_distribution<double>(d.mean, d.sd)(rng) : d.mean;
    }
    double operator()(const LogNormalDist& d) const {
      return d.sd_log > 0.0 ? std::lognormal_distribution<double>(d.mu_log, d.sd_log)(rng)
                            : std::exp(d.mu_log);
    }
    double operator()(const UniformDist& d) const {
      return d.hi > d.lo ? std::uniform_real_distribution<double>(d.lo, d.hi)(rng) : d.lo;
    }
  } visitor{rng};
  double s = std::visit(visitor, phase.dist);
  if (phase.input_noise_sd > 0.0)
    s *= 1.0 + phase.input_noise_sd * std::normal_distribution<double>(0.0, 1.0)(rng);
  return std::max(s, kMinSlowdown);
}

/// The true environment of one input, fixed before any decision is made.
struct InputEnvironment {
  std::size_t phase_index = 0;
  double slowdown = 1.0;
  double idle_power = 0.0;
};

inline std::vector<InputEnvironment> realize(const Trace& trace) {
  std::vector<InputEnvironment> env;
  env.reserve(trace.total_length());
  for (std::size_t ph = 0; ph < trace.phases.size(); ++ph) {
    const auto& phase = trace.phases[ph];
    for (std::size_t k = 0; k < phase.length; ++k) {
      auto rng = input_rng(trace.seed, env.size());
      env.push_back({ph, draw_slowdown(phase, rng), phase.idle_power_true});
    }
  }
  return env;
}

// ---------------------------------------------------------------------------
// Execution and measurement

struct ExecutionOutcome {
  double true_slowdown = 1.0;
  /// Time the inference occupied the device, excluding scheduler overhead.
  double observed_latency = 0.0;
  /// Last stage delivered by the deadline (0 = none).
  std::size_t completed_stage = 0;
  /// Observation for the slow-down filter: latency and the profiled latency
  /// of the same stage.
  double xi_latency = 0.0;
  double xi_t_prof = 0.0;
};

/// Runs `decision` under slow-down `slowdown` with an inference window of
/// `window` seconds. Traditional models run to completion; anytime models
/// stop at the target stage or at the window edge, whichever comes first.
inline ExecutionOutcome execute(const ConfigDecision& decision, const ConfigSpace& space,
                                double slowdown, double window) {
  const auto& dnn = space.dnns[decision.dnn_index];
  const std::size_t j = decision.power_index;
  ExecutionOutcome out;
  out.true_slowdown = slowdown;

  if (!dnn.is_anytime()) {
    const double t = dnn.stages.front().t_prof[j];
    out.observed_latency = slowdown * t;
    out.completed_stage = out.observed_latency <= window ? 1 : 0;
    out.xi_latency = out.observed_latency;
    out.xi_t_prof = t;
    return out;
  }

  const std::size_t target = decision.target_stage;
  for (std::size_t k = 1; k <= target; ++k) {
    if (slowdown * dnn.stages[k - 1].t_prof[j] <= window)
      out.completed_stage = k;
    else
      break;
  }
  const double t_target = dnn.stages[target - 1].t_prof[j];
  out.observed_latency = std::min(slowdown * t_target, window);
  if (out.completed_stage > 0) {
    out.xi_t_prof = dnn.stages[out.completed_stage - 1].t_prof[j];
    out.xi_latency = slowdown * out.xi_t_prof;
  } else {
    // Censored: only a lower bound on the slow-down is visible.
    out.xi_t_prof = dnn.stages.front().t_prof[j];
    out.xi_latency = window;
  }
  return out;
}

inline ExecutionOutcome sample_step(const EnvironmentPhase& phase, Rng& rng,
                                    const ConfigDecision& decision, const ConfigSpace& space,
                                    double window) {
  return execute(decision, space, draw_slowdown(phase, rng), window);
}

struct ViolationFlags {
  bool latency = false;
  bool accuracy = false;
  bool energy = false;

  [[nodiscard]] bool any() const { return latency || accuracy || energy; }
  [[nodiscard]] int count() const { return int(latency) + int(accuracy) + int(energy); }
};

struct StepRecord {
  std::size_t input_index = 0;
  std::size_t phase_index = 0;
  ConfigDecision decision;
  double true_slowdown = 1.0;
  double observed_latency = 0.0;
  /// Inference latency plus scheduler overhead.
  double busy_time = 0.0;
  /// Deadline that applied to this input (t_goal, or its group share).
  double period = 0.0;
  std::size_t completed_stage = 0;
  bool deadline_met = false;
  double delivered_accuracy = 0.0;
  double cap_watts = 0.0;
  double idle_power = 0.0;
  double inference_energy = 0.0;
  double idle_energy = 0.0;
  double energy = 0.0;
  /// Slow-down observation fed back to the filter.
  double xi = 1.0;
  double xi_latency = 0.0;
  double xi_t_prof = 0.0;
  ViolationFlags violations;
};

/// Scores one executed input against the user's (unadjusted) goals. The
/// device draws the cap while inference runs and `idle_power_true` for the
/// rest of the period.
inline StepRecord measure(const ConfigDecision& decision, const ExecutionOutcome& outcome,
                          const ConfigSpace& space, const ConstraintSpec& spec,
                          double idle_power_true, double period) {
  const auto& dnn = space.dnns[decision.dnn_index];
  const double cap = space.powers[decision.power_index].cap_watts;

  StepRecord r;
  r.decision = decision;
  r.true_slowdown = outcome.true_slowdown;
  r.observed_latency = outcome.observed_latency;
  r.busy_time = outcome.observed_latency + spec.overhead_budget;
  r.period = period;
  r.completed_stage = outcome.completed_stage;

  if (dnn.is_anytime()) {
    r.deadline_met = outcome.completed_stage >= 1;
  } else {
    r.deadline_met = outcome.observed_latency <= period - spec.overhead_budget;
    r.completed_stage = r.deadline_met ? 1 : 0;
  }
  r.delivered_accuracy =
      r.completed_stage > 0 ? dnn.stages[r.completed_stage - 1].accuracy : dnn.q_fail;

  r.cap_watts = cap;
  r.idle_power = idle_power_true;
  r.inference_energy = cap * std::min(r.observed_latency, period);
  r.idle_energy = idle_power_true * std::max(0.0, period - r.observed_latency);
  r.energy = r.inference_energy + r.idle_energy;

  r.xi_latency = outcome.xi_latency;
  r.xi_t_prof = outcome.xi_t_prof;
  r.xi = outcome.xi_latency / outcome.xi_t_prof;

  r.violations.latency = !r.deadline_met;
  r.violations.accuracy = spec.q_goal && r.delivered_accuracy < *spec.q_goal;
  r.violations.energy = spec.e_goal && r.energy > *spec.e_goal;
  return r;
}

// ---------------------------------------------------------------------------
// Closed loop

/// Everything a policy may look at when choosing the configuration for the
/// next input.
struct DecisionContext {
  std::size_t input_index = 0;
  /// Inference window after goal adjustment.
  double t_goal = 0.0;
  double period = 0.0;
  bool deadline_infeasible = false;
  const ConfigSpace& space;
  const ConstraintSpec& spec;
  const ControllerState& estimates;
  std::span<const StepRecord> history;
};

class Policy {
 public:
  virtual ~Policy() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  virtual ConfigDecision decide(const DecisionContext& ctx) = 0;
  /// Called after each input with what actually happened.
  virtual void observe(const StepRecord&) {}
};

struct RunOptions {
  SlowdownParams slowdown;
  IdlePowerParams idle;
  double min_goal = 0.001;
};

struct PhaseSummary {
  std::size_t count = 0;
  double mean_energy = 0.0;
  double mean_accuracy = 0.0;
  double mean_error = 0.0;
  double latency_violation_rate = 0.0;
  double accuracy_violation_rate = 0.0;
  double energy_violation_rate = 0.0;
  double any_violation_rate = 0.0;
};

struct Summary {
  PhaseSummary overall;
  std::vector<PhaseSummary> per_phase;
  double total_inference_energy = 0.0;
  double total_idle_energy = 0.0;
};

/// Lower is better: mean energy when minimising energy, mean error otherwise.
inline double objective(const PhaseSummary& s, Mode mode) {
  return mode == Mode::MinimizeEnergy ? s.mean_energy : s.mean_error;
}

struct RunResult {
  std::vector<StepRecord> records;
  Summary summary;
};

inline PhaseSummary summarize(std::span<const StepRecord> records) {
  PhaseSummary s;
  s.count = records.size();
  if (records.empty()) return s;
  for (const auto& r : records) {
    s.mean_energy += r.energy;
    s.mean_accuracy += r.delivered_accuracy;
    s.latency_violation_rate += r.violations.latency;
    s.accuracy_violation_rate += r.violations.accuracy;
    s.energy_violation_rate += r.violations.energy;
    s.any_violation_rate += r.violations.any();
  }
  const double n = static_cast<double>(records.size());
  s.mean_energy /= n;
  s.mean_accuracy /= n;
  s.mean_error = 1.0 - s.mean_accuracy;
  s.latency_violation_rate /= n;
  s.accuracy_violation_rate /= n;
  s.energy_violation_rate /= n;
  s.any_violation_rate /= n;
  return s;
}

inline Summary summarize(std::span<const StepRecord> records, std::size_t n_phases) {
  Summary s;
  s.overall = summarize(records);
  std::vector<std::vector<StepRecord>> by_phase(n_phases);
  for (const auto& r : records) {
    if (r.phase_index < n_phases) by_phase[r.phase_index].push_back(r);
    s.total_inference_energy += r.inference_energy;
    s.total_idle_energy += r.idle_energy;
  }
  for (const auto& v : by_phase) s.per_phase.push_back(summarize(v));
  return s;
}

/// Replays `trace` with `policy` in the loop. Per input: fold the previous
/// measurement into the estimators, adjust the goal, let the policy decide,
/// execute and measure.
inline RunResult run(const ConfigSpace& space, const ConstraintSpec& spec, const Trace& trace,
                     std::span<const InputEnvironment> env, Policy& policy,
                     const RunOptions& options = {}) {
  ControllerState state{
      slowdown_init(options.slowdown),
      idle_power_init(space.p_idle_prof / space.powers.back().cap_watts, options.idle)};

  RunResult result;
  result.records.reserve(env.size());

  std::optional<GroupState> group;
  for (std::size_t n = 0; n < env.size(); ++n) {
    if (trace.group_size) {
      const std::size_t gs = *trace.group_size;
      if (n % gs == 0) {
        const std::size_t count = std::min(gs, env.size() - n);
        group = GroupState{static_cast<double>(count) * spec.t_goal, count};
      }
    }

    const AdjustedGoal goal = adjust_goal(spec, group, options.min_goal);
    const double period = goal.t_goal + spec.overhead_budget;

    const DecisionContext ctx{n,     goal.t_goal, period, goal.infeasible,
                              space, spec,        state,  result.records};
    const ConfigDecision decision = policy.decide(ctx);

    const auto outcome = execute(decision, space, env[n].slowdown, goal.t_goal);
    StepRecord rec = measure(decision, outcome, space, spec, env[n].idle_power, period);
    rec.input_index = n;
    rec.phase_index = env[n].phase_index;
    if (goal.infeasible) {
      rec.deadline_met = false;
      rec.violations.latency = true;
    }

    if (group) {
      group->remaining_budget -= std::max(rec.busy_time, period);
      --group->remaining_count;
    }

    state.slowdown = slowdown_update(state.slowdown, rec.xi_latency, rec.xi_t_prof);
    state.idle = idle_power_update(state.idle, env[n].idle_power,
                                   space.powers[decision.power_index].cap_watts);
    policy.observe(rec);
    result.records.push_back(rec);
  }

  result.summary = summarize(result.records, trace.phases.size());
  return result;
}

inline RunResult run(const ConfigSpace& space, const ConstraintSpec& spec, const Trace& trace,
                     Policy& policy, const RunOptions& options = {}) {
  const auto env = realize(trace);
  return run(space, spec, trace, env, policy, options);
}

// ---------------------------------------------------------------------------
// Slow-down diagnostics

struct XiDiagnostics {
  std::vector<double> values;
  double bin_lo = 0.0;
  double bin_width = 0.0;
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double sd = 0.0;
};

/// Histogram (40 equal bins over the observed range) and maximum-likelihood
/// Gaussian fit of the observed slow-down factors.
inline XiDiagnostics xi_diagnostics(std::span<const double> xi, std::size_t bins = 40) {
  if (xi.size() < 30) throw std::invalid_argument("xi_diagnostics: need at least 30 observations");
  XiDiagnostics d;
  d.values.assign(xi.begin(), xi.end());

  const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  d.bin_lo = *lo;
  const double range = *hi - *lo;
  d.bin_width = range > 0.0 ? range / static_cast<double>(bins) : 1.0;
  d.counts.assign(bins, 0);
  for (const double v : d.values) {
    auto b = static_cast<std::size_t>((v - d.bin_lo) / d.bin_width);
    ++d.counts[std::min(b, bins - 1)];
  }

  for (const double v : d.values) d.mean += v;
  d.mean /= static_cast<double>(d.values.size());
  for (const double v : d.values) d.sd += (v - d.mean) * (v - d.mean);
  d.sd = std::sqrt(d.sd / static_cast<double>(d.values.size()));
  return d;
}

inline XiDiagnostics xi_diagnostics(std::span<const StepRecord> records, std::size_t bins = 40) {
  std::vector<double> xi;
  xi.reserve(records.size());
  for (const auto& r : records) xi.push_back(r.xi);
  return xi_diagnostics(xi, bins);
}

}  // namespace alert
