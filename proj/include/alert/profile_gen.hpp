#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "alert/model.hpp"
#include "alert/simulator.hpp"

namespace alert {

/// Knobs of the synthetic profile family.
///
/// Traditional models lie on or above a convex latency/error frontier
/// error(t) = max_error * (t / min_latency)^-b, with b chosen so the frontier
/// spans `error_spread` in error over `latency_spread` in latency. The
/// fastest and slowest models sit on the frontier; the rest are either on it
/// (log-spaced) or dominated. Latency at cap p is t_max_cap * (p_max / p)^e.
struct ProfileKnobs {
  std::size_t dnn_count = 8;
  std::size_t anytime_count = 1;
  std::size_t anytime_stages = 4;
  double best_accuracy = 0.95;
  double error_spread = 7.8;
  double min_latency = 0.02;   // fastest model at the highest cap, seconds
  double latency_spread = 18.0;
  double power_exponent = 0.7;
  double power_min = 10.0;
  double power_max = 50.0;
  double power_step = 5.0;
  double p_idle_prof = 5.0;
  int num_classes = 100;
  double dominated_fraction = 0.3;
  std::uint64_t seed = 1;
};

inline ConfigSpace generate_profile(const ProfileKnobs& k) {
  if (k.dnn_count < 2) throw std::invalid_argument("gen-profile: need at least 2 models");
  if (k.anytime_count >= k.dnn_count)
    throw std::invalid_argument("gen-profile: need at least 2 traditional models");
  if (k.dnn_count - k.anytime_count < 2)
    throw std::invalid_argument("gen-profile: need at least 2 traditional models");
  if (k.anytime_count > 0 && k.anytime_stages < 2)
    throw std::invalid_argument("gen-profile: anytime models need at least 2 stages");
  if (!(k.best_accuracy > 0.0 && k.best_accuracy < 1.0))
    throw std::invalid_argument("gen-profile: best accuracy must lie in (0, 1)");
  if (!(k.error_spread > 1.0) || !(k.latency_spread > 1.0))
    throw std::invalid_argument("gen-profile: spreads must exceed 1");
  const double min_error = 1.0 - k.best_accuracy;
  const double max_error = min_error * k.error_spread;
  if (!(max_error < 1.0 - 1.0 / k.num_classes))
    throw std::invalid_argument("gen-profile: error range reaches random-guess accuracy");
  if (!(k.min_latency > 0.0)) throw std::invalid_argument("gen-profile: latency must be positive");
  if (!(k.power_exponent > 0.0)) throw std::invalid_argument("gen-profile: exponent must be positive");
  if (!(k.power_min > 0.0 && k.power_max > k.power_min && k.power_step > 0.0))
    throw std::invalid_argument("gen-profile: degenerate power range");
  if (!(k.p_idle_prof > 0.0 && k.p_idle_prof < k.power_min))
    throw std::invalid_argument("gen-profile: idle power must lie in (0, min cap)");
  if (k.num_classes < 2) throw std::invalid_argument("gen-profile: need at least 2 classes");

  ConfigSpace space;
  for (double p = k.power_min; p <= k.power_max + 1e-9 * k.power_max; p += k.power_step)
    space.powers.push_back({space.powers.size(), p});
  space.p_idle_prof = k.p_idle_prof;

  const double max_latency = k.min_latency * k.latency_spread;
  const double slope = std::log(k.error_spread) / std::log(k.latency_spread);
  auto frontier_error = [&](double t) { return max_error * std::pow(t / k.min_latency, -slope); };
  auto scaled = [&](double t_at_max) {
    std::vector<double> t(space.powers.size());
    for (std::size_t j = 0; j < t.size(); ++j)
      t[j] = t_at_max * std::pow(k.power_max / space.powers[j].cap_watts, k.power_exponent);
    return t;
  };

  Rng rng(mix_seed(k.seed, 0x70726f66ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t n_trad = k.dnn_count - k.anytime_count;
  const auto n_dominated = std::min<std::size_t>(
      n_trad - 2, static_cast<std::size_t>(std::floor(k.dominated_fraction * n_trad)));
  const std::size_t n_frontier = n_trad - n_dominated;

  auto add_traditional = [&](double t, double err) {
    DnnProfile d;
    const std::string idx = std::to_string(space.dnns.size());
    d.id = "dnn" + std::string(idx.size() < 2 ? 2 - idx.size() : 0, '0') + idx;
    d.kind = DnnKind::Traditional;
    d.num_classes = k.num_classes;
    d.q_fail = 1.0 / k.num_classes;
    d.stages.push_back({1.0 - err, scaled(t)});
    space.dnns.push_back(std::move(d));
  };

  for (std::size_t i = 0; i < n_frontier; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n_frontier - 1);
    const double t = k.min_latency * std::pow(k.latency_spread, frac);
    add_traditional(t, frontier_error(t));
  }
  for (std::size_t i = 0; i < n_dominated; ++i) {
    const double t = k.min_latency * std::pow(k.latency_spread, 0.1 + 0.8 * unit(rng));
    const double err = std::min(max_error, frontier_error(t) * (1.15 + 0.35 * unit(rng)));
    add_traditional(t, err);
  }

  for (std::size_t a = 0; a < k.anytime_count; ++a) {
    // The final output is somewhat slower and less accurate than a
    // traditional model of similar size.
    const double pos = k.anytime_count == 1 ? 0.75 : 0.55 + 0.35 * a / (k.anytime_count - 1.0);
    const double t_final = std::min(max_latency, k.min_latency * std::pow(k.latency_spread, pos) * 1.2);
    const double err_final = std::min(max_error, frontier_error(t_final / 1.2) * 1.1);
    const double err_first = std::max(err_final, std::min(max_error, err_final * 3.0));

    DnnProfile d;
    d.id = "any" + std::to_string(a);
    d.kind = DnnKind::Anytime;
    d.num_classes = k.num_classes;
    d.q_fail = 1.0 / k.num_classes;
    const std::size_t K = k.anytime_stages;
    for (std::size_t s = 1; s <= K; ++s) {
      const double frac = static_cast<double>(s) / static_cast<double>(K);
      const double t = t_final * std::pow(frac, 1.3);
      // Error falls geometrically from the first to the final stage.
      const double efrac = (K == 1) ? 1.0 : static_cast<double>(s - 1) / static_cast<double>(K - 1);
      const double err = err_first * std::pow(err_final / err_first, efrac);
      d.stages.push_back({1.0 - err, scaled(t)});
    }
    space.dnns.push_back(std::move(d));
  }
  return space;
}

}  // namespace alert
