#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "alert/model.hpp"

namespace alert::testing {

// Two powers (10 W, 20 W), two traditional models and one 3-stage anytime model.
inline ConfigSpace small_space() {
  ConfigSpace s;
  s.powers = {{0, 10.0}, {1, 20.0}};
  s.p_idle_prof = 2.0;

  DnnProfile fast{"fast", DnnKind::Traditional, {{0.70, {0.10, 0.05}}}, 0.01, 100};
  DnnProfile big{"big", DnnKind::Traditional, {{0.90, {0.40, 0.20}}}, 0.01, 100};
  DnnProfile any{"any",
                 DnnKind::Anytime,
                 {{0.60, {0.08, 0.04}}, {0.75, {0.20, 0.10}}, {0.85, {0.36, 0.18}}},
                 0.01,
                 100};
  s.dnns = {fast, big, any};
  return s;
}

inline ConstraintSpec min_energy_spec(double t_goal, double q_goal) {
  ConstraintSpec spec;
  spec.mode = Mode::MinimizeEnergy;
  spec.t_goal = t_goal;
  spec.q_goal = q_goal;
  return spec;
}

inline ConstraintSpec max_accuracy_spec(double t_goal, double e_goal) {
  ConstraintSpec spec;
  spec.mode = Mode::MaximizeAccuracy;
  spec.t_goal = t_goal;
  spec.e_goal = e_goal;
  return spec;
}

/// Random well-formed space: monotone latencies in power, increasing anytime stages.
inline ConfigSpace random_space(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_pow(1, 4), n_dnn(1, 5), n_stage(2, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ConfigSpace s;
  const int np = n_pow(rng);
  double cap = 5.0;
  for (int j = 0; j < np; ++j) {
    cap += 1.0 + 10.0 * u(rng);
    s.powers.push_back({static_cast<std::size_t>(j), cap});
  }
  s.p_idle_prof = 1.0 + 3.0 * u(rng);
  auto latencies = [&](double base) {
    std::vector<double> t(np);
    double cur = base;
    for (int j = 0; j < np; ++j) {
      t[j] = cur;
      cur *= 0.5 + 0.5 * u(rng);
    }
    return t;
  };
  const int nd = n_dnn(rng);
  for (int i = 0; i < nd; ++i) {
    DnnProfile d;
    d.id = "m" + std::to_string(i);
    d.q_fail = 0.01;
    if (u(rng) < 0.4) {
      d.kind = DnnKind::Anytime;
      const int ns = n_stage(rng);
      double acc = 0.3 + 0.2 * u(rng);
      double base = 0.02 + 0.1 * u(rng);
      for (int k = 0; k < ns; ++k) {
        d.stages.push_back({acc, latencies(base)});
        acc += 0.02 + 0.1 * u(rng);
        if (acc > 1.0) acc = 1.0 - 1e-3 * (ns - k);
        base *= 1.3 + u(rng);
      }
      for (std::size_t k = 1; k < d.stages.size(); ++k) {
        if (d.stages[k].accuracy <= d.stages[k - 1].accuracy)
          d.stages[k].accuracy = d.stages[k - 1].accuracy + 1e-4;
        for (int j = 0; j < np; ++j)
          if (d.stages[k].t_prof[j] <= d.stages[k - 1].t_prof[j])
            d.stages[k].t_prof[j] = d.stages[k - 1].t_prof[j] * 1.1;
      }
    } else {
      d.kind = DnnKind::Traditional;
      d.stages.push_back({0.4 + 0.55 * u(rng), latencies(0.02 + 0.4 * u(rng))});
    }
    s.dnns.push_back(std::move(d));
  }
  return s;
}

}  // namespace alert::testing
