#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "alert/predictor.hpp"
#include "alert/selector.hpp"
#include "alert/simulator.hpp"

namespace alert {

/// Which models the controller may pick from.
enum class CandidateSet { All, TraditionalOnly, AnytimeOnly };

/// The coordinated controller: predicts latency, accuracy and energy for
/// every (model, cap, stage) from the shared slow-down estimate and picks the
/// best configuration that satisfies the goal.
class AlertPolicy final : public Policy {
 public:
  explicit AlertPolicy(const ConfigSpace& space, CandidateSet candidates = CandidateSet::All)
      : candidates_(candidates) {
    for (std::size_t i = 0; i < space.dnns.size(); ++i) {
      const bool anytime = space.dnns[i].is_anytime();
      if (candidates == CandidateSet::All ||
          (candidates == CandidateSet::AnytimeOnly && anytime) ||
          (candidates == CandidateSet::TraditionalOnly && !anytime))
        dnns_.push_back(i);
    }
    if (dnns_.empty()) throw std::invalid_argument("AlertPolicy: no candidate models of the requested kind");
  }

  [[nodiscard]] std::string name() const override {
    switch (candidates_) {
      case CandidateSet::TraditionalOnly: return "alert-trad";
      case CandidateSet::AnytimeOnly: return "alert-any";
      case CandidateSet::All: break;
    }
    return "alert";
  }

  ConfigDecision decide(const DecisionContext& ctx) override {
    const auto predictions = predict_all(ctx.space, ctx.estimates.slowdown, ctx.estimates.idle,
                                         ctx.spec, ctx.t_goal, dnns_);
    return select(predictions, ctx.spec);
  }

  [[nodiscard]] const std::vector<std::size_t>& candidates() const { return dnns_; }

 private:
  CandidateSet candidates_;
  std::vector<std::size_t> dnns_;
};

}  // namespace alert
