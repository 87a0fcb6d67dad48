#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "liftassist/tuning.hpp"

using namespace liftassist;

namespace {

TaskScenario comfort_base() { return scenario_preset("comfort_step", "admittance"); }

}  // namespace

TEST(Tuning, ReturnsMinimalComfortableTau) {
  const TuningResult r = tune_time_constant(130.0);
  EXPECT_LE(r.a_w, kComfortLimit);
  EXPECT_LE(comfort_step_a_w(130.0, kDefaultB0, r.tau, comfort_base()), kComfortLimit);
  EXPECT_GT(comfort_step_a_w(130.0, kDefaultB0, r.tau - 1e-3, comfort_base()), kComfortLimit);
  EXPECT_GT(comfort_step_a_w(130.0, kDefaultB0, 0.9 * r.tau, comfort_base()), kComfortLimit);
  EXPECT_GT(r.a_w_below, kComfortLimit);
  EXPECT_TRUE(r.monotone);
}

TEST(Tuning, UnconstrainedLimitGivesLowerBound) {
  const auto r = tune_time_constant(130.0, kDefaultB0, std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.tau, 0.05);
  EXPECT_EQ(r.simulations, 1);
}

TEST(Tuning, DefaultTauIsTheBindingMass) {
  double binding = 0.0;
  for (double M_p : {80.0, 130.0, 180.0, 272.0}) binding = std::max(binding, tune_time_constant(M_p).tau);
  EXPECT_NEAR(kDefaultTau, binding, 1e-3);
  for (double M_p : {80.0, 130.0, 180.0, 272.0}) {
    EXPECT_LE(comfort_step_a_w(M_p, kDefaultB0, kDefaultTau, comfort_base()), kComfortLimit) << M_p;
  }
}

// With no patient and an ideal velocity loop the lift follows the first-order
// step v(t) = v_max (1 - e^{-t/tau}), so a_w = kx v_max sqrt(1 / (2 tau T)) and
// the comfort limit is met from tau = kx^2 v_max^2 / (2 T a^2) onwards.
TEST(Tuning, MasslessPatientMatchesClosedForm) {
  TaskScenario base = comfort_base();
  base.controller.loop.mode = VelocityLoopMode::IdealTracking;
  const double T = base.duration;
  const double analytic = 1.96 * 0.64 / (2.0 * T * kComfortLimit * kComfortLimit);
  const auto r = tune_time_constant(0.0, kDefaultB0, kComfortLimit, base);
  EXPECT_NEAR(r.tau, analytic, 0.02 * analytic);
  EXPECT_GT(r.tau, 0.05);
}

TEST(Tuning, InfeasibleLimitThrows) {
  TuningOptions opt;
  opt.tau_max = 2.0;
  opt.scan_points = 5;
  try {
    tune_time_constant(130.0, kDefaultB0, 0.01, comfort_base(), opt);
    FAIL() << "expected InfeasibleTuning";
  } catch (const InfeasibleTuning& e) {
    EXPECT_GT(e.a_w_at_upper(), 0.01);
  }
}

TEST(Tuning, RejectsNonPositiveLimit) {
  EXPECT_THROW(tune_time_constant(130.0, kDefaultB0, 0.0), ConfigError);
}

TEST(Tuning, ComfortStepReachesTopSpeed) {
  const auto sc = comfort_step_scenario(130.0, kDefaultB0, 1.0, comfort_base());
  const auto s = simulate(sc).series;
  EXPECT_NEAR(s.v.back(), 0.8, 1e-3);
}
