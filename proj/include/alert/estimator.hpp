#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace alert {

/// Tuning constants of the slow-down factor filter.
struct SlowdownParams {
  double k0 = 0.5;        // initial Kalman gain
  double r = 0.001;       // measurement noise
  double q0 = 0.1;        // process-noise floor and initial value
  double alpha = 0.3;     // forgetting factor of the process noise
  double mu0 = 1.0;
  double sigma2_0 = 0.1;
  /// The variance recurrence is written with the previous step's gain. When
  /// set, the current gain is used instead.
  bool sigma_uses_current_gain = false;
};

/// Kalman-filter state for the global slow-down factor: the ratio between
/// the latency observed at run time and the profiled latency, shared by every
/// (model, power) configuration.
struct SlowdownEstimate {
  double mu = 1.0;
  double sigma2 = 0.1;
  double k_gain = 0.5;
  double q_noise = 0.1;
  double last_innovation = 0.0;
  std::size_t updates = 0;
  SlowdownParams params;
};

inline SlowdownEstimate slowdown_init(const SlowdownParams& params = {}) {
  SlowdownEstimate s;
  s.mu = params.mu0;
  s.sigma2 = params.sigma2_0;
  s.k_gain = params.k0;
  s.q_noise = params.q0;
  s.last_innovation = 0.0;
  s.params = params;
  return s;
}

/// Feeds one observation (latency of the configuration that actually ran and
/// its profiled latency) through the adaptive-noise recurrence:
///
///   Q  = max(Q0, a*Q' + (1-a)*(K'*y')^2)
///   K  = ((1-K')*s2' + Q) / ((1-K')*s2' + Q + R)
///   y  = t_obs/t_prof - mu'
///   mu = mu' + K*y
///   s2 = (1-K')*s2' + Q
///
/// where primes denote the previous state. The innovation before the first
/// observation is taken as zero.
inline SlowdownEstimate slowdown_update(const SlowdownEstimate& prev, double observed_latency,
                                        double t_prof_used) {
  if (!(observed_latency > 0.0) || !(t_prof_used > 0.0))
    throw std::invalid_argument("slowdown_update: latencies must be positive");

  const auto& p = prev.params;
  SlowdownEstimate next = prev;

  const double carried = prev.k_gain * prev.last_innovation;
  next.q_noise = std::max(p.q0, p.alpha * prev.q_noise + (1.0 - p.alpha) * carried * carried);

  const double predicted_var = (1.0 - prev.k_gain) * prev.sigma2 + next.q_noise;
  next.k_gain = predicted_var / (predicted_var + p.r);

  next.last_innovation = observed_latency / t_prof_used - prev.mu;
  next.mu = prev.mu + next.k_gain * next.last_innovation;

  const double gain_for_var = p.sigma_uses_current_gain ? next.k_gain : prev.k_gain;
  next.sigma2 = (1.0 - gain_for_var) * prev.sigma2 + next.q_noise;

  ++next.updates;
  return next;
}

struct IdlePowerParams {
  double m0 = 0.01;     // initial process variance
  double s = 0.0001;    // process noise
  double v = 0.001;     // measurement noise
};

/// Scalar filter for the ratio between power drawn while inference is idle
/// and the power cap of the last inference.
struct IdlePowerEstimate {
  double phi = 0.0;
  double m_var = 0.01;
  /// Gain applied by the most recent update.
  double gain = 0.0;
  /// Number of measurements whose ratio exceeded 1 and was clamped.
  std::size_t clamped = 0;
  IdlePowerParams params;
};

inline IdlePowerEstimate idle_power_init(double phi0, const IdlePowerParams& params = {}) {
  IdlePowerEstimate e;
  e.phi = std::clamp(phi0, 0.0, 1.0);
  e.m_var = params.m0;
  e.params = params;
  return e;
}

inline IdlePowerEstimate idle_power_update(const IdlePowerEstimate& prev,
                                           double measured_idle_power,
                                           double last_inference_power) {
  if (!(measured_idle_power > 0.0) || !(last_inference_power > 0.0))
    throw std::invalid_argument("idle_power_update: powers must be positive");

  const auto& p = prev.params;
  IdlePowerEstimate next = prev;

  double ratio = measured_idle_power / last_inference_power;
  if (ratio > 1.0) {
    ratio = 1.0;
    ++next.clamped;
  }

  const double w = (prev.m_var + p.s) / (prev.m_var + p.s + p.v);
  next.gain = w;
  next.m_var = (1.0 - w) * (prev.m_var + p.s);
  next.phi = std::clamp(prev.phi + w * (ratio - prev.phi), 0.0, 1.0);
  return next;
}

/// Estimator state carried by a controller between inputs.
struct ControllerState {
  SlowdownEstimate slowdown;
  IdlePowerEstimate idle;
};

}  // namespace alert
