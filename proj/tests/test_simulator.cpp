#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "alert/alert_policy.hpp"
#include "alert/baselines.hpp"
#include "alert/presets.hpp"
#include "alert/simulator.hpp"
#include "fixtures.hpp"

namespace alert {
namespace {

ConfigDecision decision(std::size_t dnn, std::size_t power, std::size_t stage = 1) {
  ConfigDecision d;
  d.dnn_index = dnn;
  d.power_index = power;
  d.target_stage = stage;
  return d;
}

TEST(Distributions, LogNormalFromMomentsKeepsMeanAndSd) {
  const auto ln = lognormal_from_moments(1.4, 0.1);
  EXPECT_NEAR(dist_mean(ln), 1.4, 1e-12);
  EXPECT_NEAR(dist_sd(ln), 0.1, 1e-12);
  EXPECT_NEAR(dist_sd(UniformDist{1.0, 2.0}), 1.0 / std::sqrt(12.0), 1e-15);
}

TEST(Distributions, SampleMomentsMatch) {
  EnvironmentPhase phase{1, lognormal_from_moments(1.8, 0.3), 5.0, 0.0};
  Rng rng(1);
  double sum = 0, sq = 0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = draw_slowdown(phase, rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.8, 0.005);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.3, 0.005);
}

TEST(Distributions, DrawsAreTruncatedAtMinimum) {
  EnvironmentPhase phase{1, GaussianDist{0.02, 1.0}, 5.0, 0.0};
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) ASSERT_GE(draw_slowdown(phase, rng), kMinSlowdown);
}

TEST(Realize, DeterministicAndIndependentOfLength) {
  const auto a = realize(presets::trace("dynamic", 9));
  const auto b = realize(presets::trace("dynamic", 9));
  ASSERT_EQ(a.size(), 600u);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].slowdown, b[i].slowdown);
  const auto c = realize(presets::trace("dynamic", 10));
  EXPECT_NE(a[0].slowdown + a[300].slowdown, c[0].slowdown + c[300].slowdown);
  EXPECT_EQ(a[199].phase_index, 0u);
  EXPECT_EQ(a[200].phase_index, 1u);
  EXPECT_EQ(a[599].idle_power, presets::kComputeIdleWatts);
}

TEST(Validate, TraceProblemsAreReported) {
  Trace t;
  EXPECT_FALSE(validate(t).empty());
  t.phases = {{0, GaussianDist{-1.0, 0.1}, 0.0, 0.0}};
  EXPECT_EQ(validate(t).size(), 3u);
}

TEST(Execute, TraditionalRunsToCompletion) {
  const auto s = testing::small_space();
  auto out = execute(decision(1, 0), s, 1.5, 0.5);
  EXPECT_NEAR(out.observed_latency, 0.6, 1e-15);
  EXPECT_EQ(out.completed_stage, 0u);
  EXPECT_NEAR(out.xi_latency / out.xi_t_prof, 1.5, 1e-15);
  out = execute(decision(1, 1), s, 1.5, 0.5);
  EXPECT_EQ(out.completed_stage, 1u);
}

TEST(Execute, AnytimeStopsAtWindowOrTarget) {
  const auto s = testing::small_space();
  // Stages at 20 W: 0.04, 0.10, 0.18; slow-down 1.5 gives 0.06, 0.15, 0.27.
  auto out = execute(decision(2, 1, 3), s, 1.5, 0.2);
  EXPECT_EQ(out.completed_stage, 2u);
  EXPECT_NEAR(out.observed_latency, 0.2, 1e-15);
  EXPECT_NEAR(out.xi_latency / out.xi_t_prof, 1.5, 1e-15);

  out = execute(decision(2, 1, 1), s, 1.5, 0.2);
  EXPECT_EQ(out.completed_stage, 1u);
  EXPECT_NEAR(out.observed_latency, 0.06, 1e-15);
}

TEST(Execute, AnytimeWithNoStageGivesCensoredObservation) {
  const auto s = testing::small_space();
  const auto out = execute(decision(2, 0, 3), s, 2.0, 0.1);  // first stage needs 0.16
  EXPECT_EQ(out.completed_stage, 0u);
  EXPECT_NEAR(out.xi_latency, 0.1, 1e-15);
  EXPECT_NEAR(out.xi_t_prof, 0.08, 1e-15);
}

TEST(Measure, EnergyAndViolations) {
  const auto s = testing::small_space();
  auto spec = testing::min_energy_spec(0.3, 0.8);
  spec.overhead_budget = 0.01;
  const auto d = decision(1, 1);
  const auto out = execute(d, s, 1.0, 0.29);
  const auto r = measure(d, out, s, spec, 3.0, 0.3);
  EXPECT_TRUE(r.deadline_met);
  EXPECT_NEAR(r.delivered_accuracy, 0.90, 1e-15);
  EXPECT_NEAR(r.energy, 20.0 * 0.2 + 3.0 * 0.1, 1e-12);
  EXPECT_FALSE(r.violations.any());

  const auto late = measure(d, execute(d, s, 2.0, 0.29), s, spec, 3.0, 0.3);
  EXPECT_FALSE(late.deadline_met);
  EXPECT_NEAR(late.delivered_accuracy, 0.01, 1e-15);
  EXPECT_TRUE(late.violations.latency);
  EXPECT_TRUE(late.violations.accuracy);
  EXPECT_NEAR(late.energy, 20.0 * 0.3, 1e-12);
  EXPECT_EQ(late.violations.count(), 2);
}

TEST(Measure, EnergyBudgetViolation) {
  const auto s = testing::small_space();
  const auto spec = testing::max_accuracy_spec(0.3, 3.0);
  const auto d = decision(1, 1);
  const auto r = measure(d, execute(d, s, 1.0, 0.3), s, spec, 3.0, 0.3);
  EXPECT_NEAR(r.energy, 4.0 + 0.3, 1e-12);
  EXPECT_TRUE(r.violations.energy);
  EXPECT_FALSE(r.violations.accuracy);
}

TEST(Run, SteadyGenerousConstraintsHaveNoViolations) {
  const auto s = testing::small_space();
  Trace t;
  t.seed = 1;
  t.phases = {{300, ConstantDist{1.0}, 2.0, 0.0}};
  const auto spec = testing::min_energy_spec(1.0, 0.6);
  AlertPolicy alert(s);
  const auto r = run(s, spec, t, alert);
  EXPECT_EQ(r.records.size(), 300u);
  EXPECT_EQ(r.summary.overall.any_violation_rate, 0.0);
}

TEST(Run, SummaryMatchesRecords) {
  const auto s = testing::small_space();
  const auto spec = testing::min_energy_spec(0.3, 0.8);
  const auto t = presets::trace("dynamic", 3);
  AlertPolicy alert(s);
  const auto r = run(s, spec, t, alert);
  double energy = 0, inf = 0, idle = 0;
  std::size_t acc_viol = 0;
  for (const auto& rec : r.records) {
    energy += rec.energy;
    inf += rec.inference_energy;
    idle += rec.idle_energy;
    acc_viol += rec.violations.accuracy;
  }
  EXPECT_NEAR(r.summary.overall.mean_energy, energy / 600, 1e-12);
  EXPECT_NEAR(r.summary.total_inference_energy + r.summary.total_idle_energy, inf + idle, 1e-9);
  EXPECT_NEAR(r.summary.overall.accuracy_violation_rate, acc_viol / 600.0, 1e-15);
  ASSERT_EQ(r.summary.per_phase.size(), 3u);
  double weighted = 0;
  for (const auto& p : r.summary.per_phase) weighted += p.mean_energy * p.count;
  EXPECT_NEAR(weighted / 600, r.summary.overall.mean_energy, 1e-9);
}

TEST(Run, EstimatorsSeeTheExecutedConfiguration) {
  const auto s = testing::small_space();
  Trace t;
  t.phases = {{100, ConstantDist{1.7}, 2.0, 0.0}};
  struct Probe final : Policy {
    double last_mu = 0;
    std::string name() const override { return "probe"; }
    ConfigDecision decide(const DecisionContext& ctx) override {
      last_mu = ctx.estimates.slowdown.mu;
      ConfigDecision d;
      d.power_index = 1;
      return d;
    }
  } probe;
  run(s, testing::min_energy_spec(1.0, 0.5), t, probe);
  EXPECT_NEAR(probe.last_mu, 1.7, 1e-6);
}

TEST(Run, GroupOverrunShrinksLaterShares) {
  const auto s = testing::small_space();
  Trace t;
  t.seed = 1;
  t.group_size = 4;
  t.phases = {{8, ConstantDist{1.0}, 2.0, 0.0}};
  struct BigThenFast final : Policy {
    std::string name() const override { return "big-then-fast"; }
    ConfigDecision decide(const DecisionContext& ctx) override {
      ConfigDecision d;
      d.dnn_index = ctx.input_index == 0 ? 1 : 0;  // 0.2 s, then 0.05 s
      d.power_index = 1;
      return d;
    }
  } policy;
  const auto r = run(s, testing::min_energy_spec(0.15, 0.5), t, policy);
  EXPECT_NEAR(r.records[0].period, 0.15, 1e-15);
  EXPECT_NEAR(r.records[1].period, (0.6 - 0.2) / 3, 1e-15);
  EXPECT_NEAR(r.records[2].period, (0.4 - 0.4 / 3) / 2, 1e-15);
  EXPECT_NEAR(r.records[4].period, 0.15, 1e-15);  // next group
  EXPECT_TRUE(r.records[0].violations.latency);
  EXPECT_FALSE(r.records[1].violations.latency);
}

TEST(Run, ExhaustedGroupBudgetIsALatencyViolation) {
  const auto s = testing::small_space();
  Trace t;
  t.group_size = 3;
  t.phases = {{3, ConstantDist{1.0}, 2.0, 0.0}};
  FixedPolicy fixed(decision(1, 0));  // 0.4 s, budget 0.3 for three inputs
  const auto r = run(s, testing::min_energy_spec(0.1, 0.5), t, fixed);
  EXPECT_TRUE(r.records[1].violations.latency);
  EXPECT_TRUE(r.records[2].violations.latency);
}

TEST(XiDiagnostics, HistogramAndFit) {
  std::vector<double> xi(100);
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = 1.0 + 0.01 * static_cast<double>(i);
  const auto d = xi_diagnostics(xi);
  EXPECT_EQ(d.counts.size(), 40u);
  EXPECT_EQ(std::accumulate(d.counts.begin(), d.counts.end(), std::size_t{0}), 100u);
  EXPECT_NEAR(d.mean, 1.495, 1e-12);
  EXPECT_NEAR(d.sd, 0.01 * std::sqrt((100.0 * 100.0 - 1.0) / 12.0), 1e-12);
  EXPECT_THROW(xi_diagnostics(std::vector<double>(29, 1.0)), std::invalid_argument);
}

}  // namespace
}  // namespace alert
