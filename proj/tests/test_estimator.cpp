#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "alert/estimator.hpp"

namespace alert {
namespace {

TEST(Slowdown, InitialStateMatchesDefaults) {
  const auto s = slowdown_init();
  EXPECT_DOUBLE_EQ(s.mu, 1.0);
  EXPECT_DOUBLE_EQ(s.sigma2, 0.1);
  EXPECT_DOUBLE_EQ(s.k_gain, 0.5);
  EXPECT_DOUBLE_EQ(s.q_noise, 0.1);
  EXPECT_EQ(s.updates, 0u);
}

// Hand-worked: observed/profiled = 1.2 twice from the default state.
TEST(Slowdown, FirstTwoUpdatesByHand) {
  auto s = slowdown_update(slowdown_init(), 0.12, 0.1);
  EXPECT_NEAR(s.q_noise, 0.1, 1e-12);
  EXPECT_NEAR(s.k_gain, 0.15 / 0.151, 1e-12);
  EXPECT_NEAR(s.last_innovation, 0.2, 1e-12);
  EXPECT_NEAR(s.mu, 1.0 + 0.2 * 0.15 / 0.151, 1e-12);
  EXPECT_NEAR(s.sigma2, 0.15, 1e-12);

  const double k1 = 0.15 / 0.151;
  s = slowdown_update(s, 0.12, 0.1);
  const double pv = (1.0 - k1) * 0.15 + 0.1;
  EXPECT_NEAR(s.q_noise, 0.1, 1e-12);  // 0.03 + 0.7 (k1 * 0.2)^2 is below the floor
  EXPECT_NEAR(s.k_gain, pv / (pv + 0.001), 1e-12);
  EXPECT_NEAR(s.sigma2, pv, 1e-12);
  EXPECT_NEAR(s.mu, 1.2, 2e-5);
}

TEST(Slowdown, CurrentGainVariantUsesNewGain) {
  SlowdownParams p;
  p.sigma_uses_current_gain = true;
  const auto s = slowdown_update(slowdown_init(p), 0.12, 0.1);
  const double k = 0.15 / 0.151;
  EXPECT_NEAR(s.sigma2, (1.0 - k) * 0.1 + 0.1, 1e-12);
}

TEST(Slowdown, LargeInnovationRaisesProcessNoise) {
  auto s = slowdown_update(slowdown_init(), 0.3, 0.1);  // ratio 3
  s = slowdown_update(s, 0.3, 0.1);
  const double carried = (0.15 / 0.151) * 2.0;
  EXPECT_NEAR(s.q_noise, 0.3 * 0.1 + 0.7 * carried * carried, 1e-12);
  EXPECT_GT(s.sigma2, 1.0);
}

TEST(Slowdown, RejectsNonPositiveLatencies) {
  const auto s = slowdown_init();
  EXPECT_THROW(slowdown_update(s, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(slowdown_update(s, 0.1, -1.0), std::invalid_argument);
  EXPECT_THROW(slowdown_update(s, std::nan(""), 0.1), std::invalid_argument);
}

// Independent transcription of the recurrence, kept deliberately literal.
struct ReferenceFilter {
  double mu = 1, s2 = 0.1, k = 0.5, q = 0.1, y = 0;
  void feed(double ratio) {
    const double q_new = std::max(0.1, 0.3 * q + 0.7 * std::pow(k * y, 2));
    const double k_new = ((1 - k) * s2 + q_new) / ((1 - k) * s2 + q_new + 0.001);
    const double y_new = ratio - mu;
    const double s2_new = (1 - k) * s2 + q_new;
    mu += k_new * y_new;
    s2 = s2_new;
    k = k_new;
    q = q_new;
    y = y_new;
  }
};

TEST(Slowdown, MatchesReferenceOnRandomFeeds) {
  std::mt19937_64 rng(42);
  std::lognormal_distribution<double> ratio(0.2, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    ReferenceFilter ref;
    auto s = slowdown_init();
    for (int n = 0; n < 100; ++n) {
      const double r = ratio(rng);
      ref.feed(r);
      s = slowdown_update(s, r * 0.05, 0.05);
      ASSERT_NEAR(s.mu, ref.mu, 1e-9 * std::max(1.0, std::abs(ref.mu)));
      ASSERT_NEAR(s.sigma2, ref.s2, 1e-9 * std::max(1.0, ref.s2));
    }
  }
}

TEST(Slowdown, VarianceNeverBelowProcessFloor) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ratio(0.5, 2.0);
  auto s = slowdown_init();
  for (int n = 0; n < 500; ++n) {
    s = slowdown_update(s, ratio(rng), 1.0);
    ASSERT_GE(s.sigma2, s.params.q0);
    ASSERT_GE(s.q_noise, s.params.q0);
    ASSERT_GT(s.k_gain, 0.0);
    ASSERT_LT(s.k_gain, 1.0);
  }
}

TEST(Slowdown, ConvergesOnConstantFeed) {
  for (const double target : {0.5, 1.0, 3.0}) {
    auto s = slowdown_init();
    for (int n = 0; n < 50; ++n) s = slowdown_update(s, target * 0.2, 0.2);
    EXPECT_LE(std::abs(s.mu - target) / target, 0.02) << target;
  }
}

TEST(IdlePower, FirstUpdateByHand) {
  const auto e0 = idle_power_init(0.1);
  const auto e = idle_power_update(e0, 5.0, 20.0);  // ratio 0.25
  const double w = 0.0101 / 0.0111;
  EXPECT_NEAR(e.gain, w, 1e-12);
  EXPECT_NEAR(e.phi, 0.1 + w * 0.15, 1e-12);
  EXPECT_NEAR(e.m_var, (1.0 - w) * 0.0101, 1e-15);
  EXPECT_EQ(e.clamped, 0u);
}

TEST(IdlePower, RatioAboveOneIsClamped) {
  auto e = idle_power_init(0.5);
  e = idle_power_update(e, 30.0, 20.0);
  EXPECT_EQ(e.clamped, 1u);
  EXPECT_LE(e.phi, 1.0);
  EXPECT_GT(e.phi, 0.5);
}

TEST(IdlePower, TracksStepChangeAndGainShrinks) {
  auto e = idle_power_init(0.2);
  double last_gain = 1.0;
  for (int n = 0; n < 30; ++n) {
    e = idle_power_update(e, 9.0, 30.0);
    ASSERT_LE(e.gain, last_gain);
    last_gain = e.gain;
  }
  EXPECT_NEAR(e.phi, 0.3, 1e-3);
  // Steady-state gain solves W = (M + S) / (M + S + V) with M = (1 - W)(M + S).
  const double s = 1e-4, v = 1e-3;
  const double m = (-s + std::sqrt(s * s + 4 * s * v)) / 2;  // M(M + S) = S V
  EXPECT_NEAR(e.gain, (m + s) / (m + s + v), 1e-3);
}

TEST(IdlePower, RejectsNonPositivePowers) {
  const auto e = idle_power_init(0.1);
  EXPECT_THROW(idle_power_update(e, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(idle_power_update(e, 1.0, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace alert
