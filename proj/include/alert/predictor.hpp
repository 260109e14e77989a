#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "alert/estimator.hpp"
#include "alert/model.hpp"
#include "alert/normal.hpp"

namespace alert {

/// Predicted behaviour of one (model, power cap, target stage) configuration
/// for the next input.
struct Prediction {
  std::size_t dnn_index = 0;
  std::size_t power_index = 0;
  /// 1-based stage the run is allowed to reach; always 1 for traditional models.
  std::size_t target_stage = 1;
  double latency_mean = 0.0;
  double latency_sigma = 0.0;
  double pr_deadline = 0.0;
  double expected_accuracy = 0.0;
  double energy = 0.0;
};

struct LatencyDistribution {
  double mean = 0.0;
  double sigma = 0.0;
};

inline LatencyDistribution latency_distribution(const SlowdownEstimate& est, double t_prof) {
  if (!(t_prof > 0.0)) throw std::invalid_argument("latency_distribution: t_prof must be positive");
  return {est.mu * t_prof, std::sqrt(est.sigma2) * t_prof};
}

/// Probability that a run with profiled latency `t_prof` finishes within
/// `t_goal`, treating the slow-down factor as N(mu, sigma2). The Gaussian is
/// not truncated at zero.
inline double deadline_probability(const SlowdownEstimate& est, double t_prof, double t_goal) {
  if (!(t_prof > 0.0) || !(t_goal > 0.0))
    throw std::invalid_argument("deadline_probability: times must be positive");
  const auto [mean, sigma] = latency_distribution(est, t_prof);
  if (!(sigma > 0.0)) return mean <= t_goal ? 1.0 : 0.0;
  return normal_cdf((t_goal - mean) / sigma);
}

/// Expected accuracy of a single-output model: on-time accuracy weighted by
/// the deadline probability, fallback accuracy otherwise.
inline double expected_accuracy_traditional(const SlowdownEstimate& est, const DnnProfile& dnn,
                                            std::size_t power_index, double t_goal) {
  const double pr = deadline_probability(est, dnn.stages.front().t_prof[power_index], t_goal);
  return pr * dnn.stages.front().accuracy + (1.0 - pr) * dnn.q_fail;
}

/// Expectation of the anytime staircase: the delivered answer is the last
/// stage (up to `target_stage`) that finishes by the deadline. All stages
/// share one slow-down draw, so P(stage k is the last one) = Pr_k - Pr_{k+1}.
inline double expected_accuracy_anytime(const SlowdownEstimate& est, const DnnProfile& dnn,
                                        std::size_t power_index, std::size_t target_stage,
                                        double t_goal) {
  if (target_stage < 1 || target_stage > dnn.stages.size())
    throw std::invalid_argument("expected_accuracy_anytime: target stage out of range");

  double acc = 0.0;
  double pr_next = 0.0;
  double pr_first = 0.0;
  for (std::size_t k = target_stage; k-- > 0;) {
    const double pr = deadline_probability(est, dnn.stages[k].t_prof[power_index], t_goal);
    acc += dnn.stages[k].accuracy * (pr - pr_next);
    pr_next = pr;
    pr_first = pr;
  }
  return acc + dnn.q_fail * (1.0 - pr_first);
}

/// Energy of one period: inference at the cap for the predicted latency plus
/// the idle draw (phi * cap) for the rest of the period. The idle term is
/// floored at zero when the latency exceeds the period.
inline double energy_for_latency(double power, double latency, double phi, double t_goal) {
  return power * latency + phi * power * std::max(0.0, t_goal - latency);
}

inline double predict_energy_mean(const SlowdownEstimate& est, const IdlePowerEstimate& idle,
                                  double power, double t_prof, double t_goal) {
  return energy_for_latency(power, est.mu * t_prof, idle.phi, t_goal);
}

/// Same as predict_energy_mean but with the pr_th-quantile of the latency
/// distribution instead of its mean.
inline double predict_energy_percentile(const SlowdownEstimate& est, const IdlePowerEstimate& idle,
                                        double power, double t_prof, double t_goal, double pr_th) {
  if (!(pr_th > 0.0 && pr_th < 1.0))
    throw std::invalid_argument("predict_energy_percentile: pr_th must lie in (0, 1)");
  const auto [mean, sigma] = latency_distribution(est, t_prof);
  const double quantile = std::max(0.0, mean + sigma * normal_quantile(pr_th));
  return energy_for_latency(power, quantile, idle.phi, t_goal);
}

/// Prediction for one configuration. `t_goal` is the (already adjusted)
/// inference window; a probabilistic threshold switches energy to its
/// percentile form.
inline Prediction predict_config(const ConfigSpace& space, const SlowdownEstimate& est,
                                 const IdlePowerEstimate& idle, const ConstraintSpec& spec,
                                 double t_goal, std::size_t dnn_index, std::size_t power_index,
                                 std::size_t target_stage) {
  const auto& dnn = space.dnns[dnn_index];
  const double power = space.powers[power_index].cap_watts;
  const double t_prof = dnn.stages[target_stage - 1].t_prof[power_index];
  const auto dist = latency_distribution(est, t_prof);

  Prediction p;
  p.dnn_index = dnn_index;
  p.power_index = power_index;
  p.target_stage = target_stage;
  p.latency_mean = dist.mean;
  p.latency_sigma = dist.sigma;
  p.pr_deadline = deadline_probability(est, t_prof, t_goal);
  p.expected_accuracy = dnn.is_anytime()
                            ? expected_accuracy_anytime(est, dnn, power_index, target_stage, t_goal)
                            : expected_accuracy_traditional(est, dnn, power_index, t_goal);
  p.energy = spec.pr_threshold
                 ? predict_energy_percentile(est, idle, power, t_prof, t_goal, *spec.pr_threshold)
                 : predict_energy_mean(est, idle, power, t_prof, t_goal);
  return p;
}

/// Predictions for every configuration of the listed models, ordered by
/// (model, power, stage).
inline std::vector<Prediction> predict_all(const ConfigSpace& space, const SlowdownEstimate& est,
                                           const IdlePowerEstimate& idle,
                                           const ConstraintSpec& spec, double t_goal,
                                           std::span<const std::size_t> dnn_indices) {
  std::vector<Prediction> out;
  for (const std::size_t i : dnn_indices) {
    const std::size_t n_stages = space.dnns[i].is_anytime() ? space.dnns[i].stage_count() : 1;
    for (std::size_t j = 0; j < space.powers.size(); ++j)
      for (std::size_t k = 1; k <= n_stages; ++k)
        out.push_back(predict_config(space, est, idle, spec, t_goal, i, j, k));
  }
  return out;
}

inline std::vector<Prediction> predict_all(const ConfigSpace& space, const SlowdownEstimate& est,
                                           const IdlePowerEstimate& idle,
                                           const ConstraintSpec& spec, double t_goal) {
  std::vector<std::size_t> all(space.dnns.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return predict_all(space, est, idle, spec, t_goal, all);
}

inline std::vector<Prediction> predict_all(const ConfigSpace& space, const SlowdownEstimate& est,
                                           const IdlePowerEstimate& idle,
                                           const ConstraintSpec& spec) {
  return predict_all(space, est, idle, spec, spec.t_goal);
}

}  // namespace alert
