#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alert {

/// One discrete power-cap bucket. Caps are strictly increasing with index.
struct PowerSetting {
  std::size_t index = 0;
  double cap_watts = 0.0;
};

/// One output of a DNN. `t_prof[j]` is the mean profiled latency (seconds)
/// of producing this output under power setting j.
struct Stage {
  double accuracy = 0.0;
  std::vector<double> t_prof;
};

enum class DnnKind { Traditional, Anytime };

/// A candidate model. Traditional models have a single stage; anytime models
/// emit an ordered sequence of increasingly accurate stages.
struct DnnProfile {
  std::string id;
  DnnKind kind = DnnKind::Traditional;
  std::vector<Stage> stages;
  /// Accuracy of the fallback answer when no stage finishes in time.
  double q_fail = 0.0;
  std::optional<int> num_classes;

  [[nodiscard]] std::size_t stage_count() const { return stages.size(); }
  [[nodiscard]] const Stage& final_stage() const { return stages.back(); }
  [[nodiscard]] double best_accuracy() const { return stages.back().accuracy; }
  [[nodiscard]] bool is_anytime() const { return kind == DnnKind::Anytime; }
};

struct ConfigSpace {
  std::vector<DnnProfile> dnns;
  std::vector<PowerSetting> powers;
  /// System idle power measured while profiling, in watts.
  double p_idle_prof = 0.0;

  [[nodiscard]] std::size_t default_power_index() const { return powers.size() - 1; }
};

enum class Mode { MinimizeEnergy, MaximizeAccuracy };

/// The user goal for one inference job.
struct ConstraintSpec {
  Mode mode = Mode::MinimizeEnergy;
  /// Per-input deadline in seconds.
  double t_goal = 0.0;
  /// Per-input energy budget in joules (MaximizeAccuracy).
  std::optional<double> e_goal;
  /// Minimum accuracy (MinimizeEnergy).
  std::optional<double> q_goal;
  /// Minimum probability of meeting the deadline, in (0, 1).
  std::optional<double> pr_threshold;
  /// Worst-case scheduler overhead per input, subtracted from the deadline.
  double overhead_budget = 0.0;
};

inline std::string_view to_string(DnnKind kind) {
  return kind == DnnKind::Anytime ? "anytime" : "traditional";
}

inline std::string_view to_string(Mode mode) {
  return mode == Mode::MinimizeEnergy ? "min-energy" : "max-accuracy";
}

namespace detail {

inline std::string dnn_label(const DnnProfile& dnn, std::size_t i) {
  return "dnn[" + std::to_string(i) + "] '" + dnn.id + "'";
}

}  // namespace detail

/// Checks every structural invariant of a configuration space and returns one
/// human-readable message per violation. An empty result means the space is
/// well formed.
inline std::vector<std::string> validate(const ConfigSpace& space) {
  std::vector<std::string> out;

  if (space.powers.empty()) out.emplace_back("powers: empty");
  if (space.dnns.empty()) out.emplace_back("dnns: empty");
  if (!(space.p_idle_prof > 0.0)) out.emplace_back("p_idle_prof: must be positive");

  for (std::size_t j = 0; j < space.powers.size(); ++j) {
    const auto& p = space.powers[j];
    if (p.index != j)
      out.push_back("powers[" + std::to_string(j) + "]: index " + std::to_string(p.index) +
                    " does not match position");
    if (!(p.cap_watts > 0.0))
      out.push_back("powers[" + std::to_string(j) + "]: cap must be positive");
    if (j > 0 && !(p.cap_watts > space.powers[j - 1].cap_watts))
      out.push_back("powers[" + std::to_string(j) + "]: caps not strictly increasing");
  }

  const std::size_t n_powers = space.powers.size();
  for (std::size_t i = 0; i < space.dnns.size(); ++i) {
    const auto& dnn = space.dnns[i];
    const std::string who = detail::dnn_label(dnn, i);

    if (dnn.id.empty()) out.push_back(who + ": empty id");
    for (std::size_t k = 0; k < i; ++k)
      if (space.dnns[k].id == dnn.id) out.push_back(who + ": duplicate id");

    if (dnn.kind == DnnKind::Traditional && dnn.stages.size() != 1)
      out.push_back(who + ": traditional profile must have exactly 1 stage");
    if (dnn.kind == DnnKind::Anytime && dnn.stages.size() < 2)
      out.push_back(who + ": anytime profile needs at least 2 stages");
    if (dnn.stages.empty()) continue;

    if (!(dnn.q_fail >= 0.0 && dnn.q_fail <= 1.0))
      out.push_back(who + ": q_fail outside [0, 1]");
    if (dnn.q_fail > dnn.stages.front().accuracy)
      out.push_back(who + ": q_fail exceeds first-stage accuracy");

    bool shapes_ok = true;
    for (std::size_t s = 0; s < dnn.stages.size(); ++s) {
      const auto& st = dnn.stages[s];
      const std::string where = who + " stage " + std::to_string(s + 1);
      if (!(st.accuracy >= 0.0 && st.accuracy <= 1.0))
        out.push_back(where + ": accuracy outside [0, 1]");
      if (st.t_prof.size() != n_powers) {
        out.push_back(where + ": t_prof has " + std::to_string(st.t_prof.size()) +
                      " entries, expected " + std::to_string(n_powers));
        shapes_ok = false;
        continue;
      }
      for (std::size_t j = 0; j < n_powers; ++j) {
        if (!(st.t_prof[j] > 0.0))
          out.push_back(where + ": latency at power " + std::to_string(j) + " not positive");
        if (j > 0 && st.t_prof[j] > st.t_prof[j - 1])
          out.push_back(where + ": latency increases with power cap at power " +
                        std::to_string(j));
      }
    }

    if (dnn.kind == DnnKind::Anytime) {
      for (std::size_t s = 1; s < dnn.stages.size(); ++s)
        if (!(dnn.stages[s].accuracy > dnn.stages[s - 1].accuracy)) {
          out.push_back(who + ": accuracies not increasing at stage " + std::to_string(s + 1));
          break;
        }
      if (shapes_ok) {
        for (std::size_t s = 1; s < dnn.stages.size(); ++s)
          for (std::size_t j = 0; j < n_powers; ++j)
            if (!(dnn.stages[s].t_prof[j] > dnn.stages[s - 1].t_prof[j]))
              out.push_back(who + ": stage " + std::to_string(s + 1) +
                            " latency not above previous stage at power " + std::to_string(j));
      }
    }
  }
  return out;
}

/// Checks the goal itself; mode-specific budgets must be present.
inline std::vector<std::string> validate(const ConstraintSpec& spec) {
  std::vector<std::string> out;
  if (!(spec.overhead_budget >= 0.0)) out.emplace_back("overhead_budget: negative");
  if (!(spec.t_goal > spec.overhead_budget))
    out.emplace_back("t_goal: must exceed overhead_budget");
  if (spec.mode == Mode::MaximizeAccuracy && !spec.e_goal)
    out.emplace_back("e_goal: required when maximizing accuracy");
  if (spec.mode == Mode::MinimizeEnergy && !spec.q_goal)
    out.emplace_back("q_goal: required when minimizing energy");
  if (spec.e_goal && !(*spec.e_goal > 0.0)) out.emplace_back("e_goal: must be positive");
  if (spec.q_goal && !(*spec.q_goal > 0.0 && *spec.q_goal <= 1.0))
    out.emplace_back("q_goal: must lie in (0, 1]");
  if (spec.pr_threshold && !(*spec.pr_threshold > 0.0 && *spec.pr_threshold < 1.0))
    out.emplace_back("pr_threshold: must lie in (0, 1)");
  return out;
}

/// Index of the DNN whose final stage is fastest at `power_index`; ties go to
/// the lexicographically smaller id. Optionally restricted to one kind.
/// Returns nullopt only when no DNN of the requested kind exists.
inline std::optional<std::size_t> fastest_dnn_index(const ConfigSpace& space,
                                                    std::size_t power_index,
                                                    std::optional<DnnKind> kind = std::nullopt) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < space.dnns.size(); ++i) {
    const auto& dnn = space.dnns[i];
    if (kind && dnn.kind != *kind) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& cur = space.dnns[*best];
    const double t = dnn.final_stage().t_prof[power_index];
    const double t_best = cur.final_stage().t_prof[power_index];
    if (t < t_best || (t == t_best && dnn.id < cur.id)) best = i;
  }
  return best;
}

inline const DnnProfile& fastest_dnn(const ConfigSpace& space, std::size_t power_index) {
  return space.dnns[*fastest_dnn_index(space, power_index)];
}

}  // namespace alert
