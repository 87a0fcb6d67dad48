#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "liftassist/simulation.hpp"
#include "liftassist/virtual_user.hpp"

using namespace liftassist;

namespace {

UserModel ideal_user() {
  UserModel u;
  u.Kp_u = 1e4;
  u.Kx_u = 1e4;
  u.reaction_delay = 0.0;
  return u;
}

// Time after which |v - target| stays within tol until `until`.
double time_to_reach(const SeriesBundle& s, double target, double tol, double until) {
  double last_out = 0.0;
  for (std::size_t i = 0; i < s.size() && s.t[i] < until; ++i) {
    if (std::abs(s.v[i] - target) > tol) last_out = s.t[i] + s.dt;
  }
  return last_out;
}

}  // namespace

TEST(UserForce, OnReferenceIsZero) {
  PlantState s;
  s.x = 1.2;
  s.v = 0.4;
  EXPECT_EQ(user_force(ReferenceSample{1.2, 0.4}, s, UserModel{}), 0.0);
}

TEST(UserForce, ProportionalToSpeedError) {
  UserModel u;
  u.Kp_u = 300.0;
  u.Kx_u = 0.0;
  PlantState s;
  s.v = 0.3;
  EXPECT_NEAR(user_force(ReferenceSample{5.0, 0.4}, s, u), 30.0, 1e-12);
}

TEST(UserForce, ClampedAtMaximum) {
  const UserModel u;
  PlantState s;
  EXPECT_EQ(user_force(ReferenceSample{100.0, 5.0}, s, u), u.F_user_max);
  EXPECT_EQ(user_force(ReferenceSample{-100.0, -5.0}, s, u), -u.F_user_max);
}

TEST(Caregiver, ReactsToDelayedObservation) {
  UserModel u;
  u.Kp_u = 100.0;
  u.Kx_u = 0.0;
  u.reaction_delay = 0.2;
  const double dt = 1e-3;
  VirtualCaregiver c(u, Reference(), dt);
  for (int k = 0; k < 1000; ++k) {
    PlantState s;
    s.t = k * dt;
    s.v = 1e-3 * k;
    const double F = c.force(s);
    const double seen = 1e-3 * std::max(0, k - 200);
    ASSERT_NEAR(F, -100.0 * seen, 1e-12) << k;
  }
}

TEST(Caregiver, RejectsBadModel) {
  UserModel u;
  u.F_user_max = 0.0;
  EXPECT_THROW(VirtualCaregiver(u, Reference(), 1e-3), ConfigError);
}

TEST(Reference, PointToPointCoversDistance) {
  const auto r = Reference::point_to_point(3.0, 0.5, 0.4);
  EXPECT_NEAR(r.final_position(), 3.0, 1e-12);
  EXPECT_EQ(r.peak_speed(), 0.5);
  EXPECT_NEAR(r.sample(100.0).x_ref, 3.0, 1e-12);
  EXPECT_NEAR(r.sample(0.625).v_ref, 0.25, 1e-12);
  EXPECT_NEAR(r.sample(0.625).x_ref, 0.5 * 0.4 * 0.625 * 0.625, 1e-12);
  EXPECT_THROW(Reference::point_to_point(0.1, 0.5, 0.4), ConfigError);
}

TEST(Reference, KnotsMustIncrease) {
  EXPECT_THROW(Reference({{0.0, 0.0}, {0.0, 1.0}}), ConfigError);
  EXPECT_THROW(Reference(std::vector<Knot>{}), ConfigError);
}

TEST(Scenarios, SensitivityPresets) {
  const auto a = scenario_preset("sensitivity_A", "admittance");
  const auto b = scenario_preset("sensitivity_B", "admittance");
  EXPECT_EQ(a.M_p, 90.0);
  EXPECT_EQ(a.friction.b_visc, 50.0);
  EXPECT_EQ(b.M_p, 272.0);
  EXPECT_EQ(b.friction.b_visc, 100.0);
}

TEST(Scenarios, CruisePeakSpeed) {
  const auto sc = scenario_preset("cruise");
  EXPECT_EQ(std::get<TrackingTask>(sc.input).reference.peak_speed(), 0.8);
}

TEST(Scenarios, AllPresetsValidate) {
  for (auto s : kScenarioNames) {
    for (auto c : kControllerNames) EXPECT_NO_THROW(scenario_preset(s, c).validate()) << s << ' ' << c;
  }
  EXPECT_THROW(scenario_preset("stairs"), ConfigError);
}

TEST(Scenarios, ValidationRejectsBadValues) {
  auto sc = scenario_preset("cruise");
  sc.duration = 0.0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = scenario_preset("cruise");
  sc.M_p = 300.0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = scenario_preset("cruise");
  sc.dt = 0.05;
  EXPECT_THROW(sc.validate(), ConfigError);
}

TEST(Caregiver, DeterministicForceTrace) {
  const auto sc = scenario_preset("reversal", "variable_admittance");
  const auto a = simulate(sc).series;
  const auto b = simulate(sc).series;
  EXPECT_EQ(a.F_user, b.F_user);
  EXPECT_EQ(a.x, b.x);
}

TEST(Caregiver, ZeroGainLeavesLiftAtRest) {
  for (auto c : kControllerNames) {
    auto sc = scenario_preset("cruise", c);
    auto& task = std::get<TrackingTask>(sc.input);
    task.user.Kp_u = 0.0;
    task.user.Kx_u = 0.0;
    const auto s = simulate(sc).series;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ASSERT_EQ(s.F_user[i], 0.0) << c;
      ASSERT_EQ(s.x[i], 0.0) << c;
    }
  }
}

TEST(Caregiver, IdealUserReachesCruiseSpeed) {
  for (auto c : kBenchmarkControllers) {
    if (c == "no_assist") continue;
    auto sc = scenario_preset("cruise", c);
    std::get<TrackingTask>(sc.input).user = ideal_user();
    const auto s = simulate(sc).series;
    EXPECT_LE(time_to_reach(s, 0.8, 0.01, 12.0), 5.0) << c;
  }
}
