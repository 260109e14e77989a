#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <vector>

#include "alert/model.hpp"
#include "alert/predictor.hpp"

namespace alert {

/// Which constraint had to be relaxed to produce a decision. Latency is never
/// relaxed: deadline misses are already priced into expected accuracy.
enum class FallbackLevel { None, DroppedEnergy, DroppedAccuracy };

inline std::string_view to_string(FallbackLevel level) {
  switch (level) {
    case FallbackLevel::None: return "none";
    case FallbackLevel::DroppedEnergy: return "dropped-energy";
    case FallbackLevel::DroppedAccuracy: return "dropped-accuracy";
  }
  return "?";
}

struct ConfigDecision {
  std::size_t dnn_index = 0;
  std::size_t power_index = 0;
  std::size_t target_stage = 1;
  Prediction prediction;
  bool feasible = true;
  FallbackLevel fallback_level = FallbackLevel::None;

  friend bool operator==(const ConfigDecision& a, const ConfigDecision& b) {
    return a.dnn_index == b.dnn_index && a.power_index == b.power_index &&
           a.target_stage == b.target_stage && a.feasible == b.feasible &&
           a.fallback_level == b.fallback_level;
  }
};

/// Remaining budget of a group of inputs sharing one deadline.
struct GroupState {
  double remaining_budget = 0.0;
  std::size_t remaining_count = 0;
};

struct AdjustedGoal {
  double t_goal = 0.0;
  /// The group budget is exhausted; the input cannot meet its deadline.
  bool infeasible = false;
};

/// Deadline for the next inference: the per-input or per-share deadline minus
/// the worst-case scheduler overhead, floored at `min_goal`.
inline AdjustedGoal adjust_goal(const ConstraintSpec& spec,
                                const std::optional<GroupState>& group = std::nullopt,
                                double min_goal = 0.001) {
  double share = spec.t_goal;
  if (group) {
    if (group->remaining_count == 0)
      throw std::invalid_argument("adjust_goal: group has no remaining inputs");
    share = group->remaining_budget / static_cast<double>(group->remaining_count);
  }
  const double goal = share - spec.overhead_budget;
  if (share <= 0.0 || !(std::max(goal, min_goal) > 0.0)) return {std::max(min_goal, 0.0), true};
  return {std::max(goal, min_goal), false};
}

namespace detail {

inline bool meets_threshold(const Prediction& p, const ConstraintSpec& spec) {
  return !spec.pr_threshold || p.pr_deadline >= *spec.pr_threshold;
}

inline bool meets_all(const Prediction& p, const ConstraintSpec& spec) {
  if (!meets_threshold(p, spec)) return false;
  if (spec.mode == Mode::MaximizeAccuracy) return !spec.e_goal || p.energy <= *spec.e_goal;
  return !spec.q_goal || p.expected_accuracy >= *spec.q_goal;
}

/// Strict "a is preferred to b" for the given objective.
inline bool prefer(const Prediction& a, const Prediction& b, Mode objective) {
  if (objective == Mode::MaximizeAccuracy) {
    if (a.expected_accuracy != b.expected_accuracy) return a.expected_accuracy > b.expected_accuracy;
    if (a.energy != b.energy) return a.energy < b.energy;
  } else {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.expected_accuracy != b.expected_accuracy) return a.expected_accuracy > b.expected_accuracy;
  }
  if (a.power_index != b.power_index) return a.power_index < b.power_index;
  if (a.dnn_index != b.dnn_index) return a.dnn_index < b.dnn_index;
  return a.target_stage < b.target_stage;
}

inline ConfigDecision make_decision(const Prediction& p, FallbackLevel level) {
  ConfigDecision d;
  d.dnn_index = p.dnn_index;
  d.power_index = p.power_index;
  d.target_stage = p.target_stage;
  d.prediction = p;
  d.feasible = level == FallbackLevel::None;
  d.fallback_level = level;
  return d;
}

}  // namespace detail

/// Picks the configuration that optimises the spec's objective subject to its
/// constraints, relaxing energy and then accuracy when nothing is feasible.
inline ConfigDecision select(std::span<const Prediction> predictions, const ConstraintSpec& spec) {
  if (predictions.empty()) throw std::invalid_argument("select: no predictions");

  const Prediction* best = nullptr;
  for (const auto& p : predictions)
    if (detail::meets_all(p, spec) && (!best || detail::prefer(p, *best, spec.mode))) best = &p;
  if (best) return detail::make_decision(*best, FallbackLevel::None);

  if (spec.mode == Mode::MaximizeAccuracy) {
    for (const auto& p : predictions)
      if (detail::meets_threshold(p, spec) &&
          (!best || detail::prefer(p, *best, Mode::MaximizeAccuracy)))
        best = &p;
    if (best) return detail::make_decision(*best, FallbackLevel::DroppedEnergy);
  }

  best = &predictions.front();
  for (const auto& p : predictions)
    if (detail::prefer(p, *best, Mode::MaximizeAccuracy)) best = &p;
  return detail::make_decision(*best, FallbackLevel::DroppedAccuracy);
}

/// Reference implementation of select: materialises each relaxation level's
/// candidate set and sorts it by the full tie-breaking key.
inline ConfigDecision brute_force_select(std::span<const Prediction> predictions,
                                         const ConstraintSpec& spec) {
  if (predictions.empty()) throw std::invalid_argument("brute_force_select: no predictions");

  auto key = [](const Prediction& p, Mode objective) {
    const double primary = objective == Mode::MaximizeAccuracy ? -p.expected_accuracy : p.energy;
    const double secondary = objective == Mode::MaximizeAccuracy ? p.energy : -p.expected_accuracy;
    return std::make_tuple(primary, secondary, p.power_index, p.dnn_index, p.target_stage);
  };
  auto best_of = [&](std::vector<Prediction> set, Mode objective) {
    std::sort(set.begin(), set.end(), [&](const Prediction& a, const Prediction& b) {
      return key(a, objective) < key(b, objective);
    });
    return set.front();
  };

  struct Level {
    FallbackLevel level;
    Mode objective;
    bool use_goal;
    bool use_threshold;
  };
  std::vector<Level> levels{{FallbackLevel::None, spec.mode, true, true}};
  if (spec.mode == Mode::MaximizeAccuracy)
    levels.push_back({FallbackLevel::DroppedEnergy, Mode::MaximizeAccuracy, false, true});
  levels.push_back({FallbackLevel::DroppedAccuracy, Mode::MaximizeAccuracy, false, false});

  for (const auto& lvl : levels) {
    std::vector<Prediction> candidates;
    for (const auto& p : predictions) {
      bool ok = true;
      if (lvl.use_threshold && spec.pr_threshold) ok = ok && p.pr_deadline >= *spec.pr_threshold;
      if (lvl.use_goal && spec.mode == Mode::MaximizeAccuracy && spec.e_goal)
        ok = ok && p.energy <= *spec.e_goal;
      if (lvl.use_goal && spec.mode == Mode::MinimizeEnergy && spec.q_goal)
        ok = ok && p.expected_accuracy >= *spec.q_goal;
      if (ok) candidates.push_back(p);
    }
    if (!candidates.empty()) return detail::make_decision(best_of(candidates, lvl.objective), lvl.level);
  }
  return {};  // unreachable: the last level accepts everything
}

}  // namespace alert
