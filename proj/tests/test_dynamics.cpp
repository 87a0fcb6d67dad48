#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "liftassist/dynamics.hpp"

using namespace liftassist;

namespace {

PlantParams default_plant() { return PlantParams{}; }

FrictionParams frictionless() { return FrictionParams{0.0, 0.0, 1e-3}; }

PlantState run(PlantState s, double F, const PlantParams& p, const FrictionParams& fr, double dt, double T,
               CartMode mode = CartMode::Free) {
  const auto n = static_cast<long>(std::llround(T / dt));
  for (long k = 0; k < n; ++k) s = step(s, ForceBreakdown{F, 0.0, 0.0}, p, fr, dt, mode);
  return s;
}

// Period from successive upward zero crossings of omega, linearly interpolated.
double measured_period(double theta0, double dt) {
  const PlantParams p = default_plant();
  PlantState s;
  s.theta = theta0;
  std::vector<double> crossings;
  for (int k = 0; k < 20000 && crossings.size() < 3; ++k) {
    const PlantState next = step(s, {}, p, frictionless(), dt, CartMode::Pinned);
    if (k > 0 && s.omega < 0.0 && next.omega >= 0.0) {
      crossings.push_back(s.t + dt * (-s.omega) / (next.omega - s.omega));
    }
    s = next;
  }
  return (crossings.at(2) - crossings.at(0)) / 2.0;
}

}  // namespace

TEST(PlantDerivatives, HangingEquilibriumIsAtRest) {
  const auto r = plant_derivatives(PlantState{}, 0.0, default_plant());
  EXPECT_EQ(r.dv, 0.0);
  EXPECT_EQ(r.domega, 0.0);
}

TEST(PlantDerivatives, HandSolvedMassMatrixAtVertical) {
  const auto r = plant_derivatives(PlantState{}, 100.0, default_plant());
  EXPECT_NEAR(r.dv, 1.0, 1e-12);
  EXPECT_NEAR(r.domega, -2.0, 1e-12);
}

TEST(PlantDerivatives, PinnedCartIsSimplePendulum) {
  PlantState s;
  s.theta = 0.1;
  const auto r = plant_derivatives(s, 0.0, default_plant(), CartMode::Pinned);
  EXPECT_EQ(r.dv, 0.0);
  EXPECT_EQ(r.dx, 0.0);
  EXPECT_NEAR(r.domega, -(9.81 / 0.5) * std::sin(0.1), 1e-12);
  EXPECT_NEAR(r.domega, -1.9587, 1e-4);
}

TEST(PlantDerivatives, MasslessPatientReducesToNewton) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PlantParams p;
  p.M_p = 0.0;
  for (int i = 0; i < 1000; ++i) {
    PlantState s{u(rng) * 10.0, u(rng), u(rng) * 1.5, u(rng) * 5.0, 0.0};
    const double F = u(rng) * 500.0;
    EXPECT_EQ(plant_derivatives(s, F, p).dv, F / p.m);
  }
}

TEST(PlantDerivatives, OddUnderMirrorSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PlantParams p = default_plant();
  for (int i = 0; i < 1000; ++i) {
    PlantState s{u(rng) * 10.0, u(rng), u(rng) * 1.5, u(rng) * 5.0, 0.0};
    const double F = u(rng) * 500.0;
    PlantState m{-s.x, -s.v, -s.theta, -s.omega, 0.0};
    const auto a = plant_derivatives(s, F, p);
    const auto b = plant_derivatives(m, -F, p);
    EXPECT_NEAR(a.dv, -b.dv, 1e-12 * (1.0 + std::abs(a.dv)));
    EXPECT_NEAR(a.domega, -b.domega, 1e-12 * (1.0 + std::abs(a.domega)));
  }
}

TEST(PlantDerivatives, RejectsNonFiniteInput) {
  PlantState s;
  s.v = std::nan("");
  EXPECT_THROW(plant_derivatives(s, 0.0, default_plant()), InvalidState);
  EXPECT_THROW(plant_derivatives(PlantState{}, INFINITY, default_plant()), InvalidState);
}

TEST(PlantDerivatives, DivergesAtHorizontalSling) {
  PlantState s;
  s.theta = std::numbers::pi / 2;
  EXPECT_THROW(plant_derivatives(s, 0.0, default_plant()), SimulationDiverged);
}

TEST(Step, ZeroStateOnlyAdvancesTime) {
  const PlantState s = step(PlantState{}, {}, default_plant(), FrictionParams{}, 1e-3);
  EXPECT_EQ(s.x, 0.0);
  EXPECT_EQ(s.v, 0.0);
  EXPECT_EQ(s.theta, 0.0);
  EXPECT_EQ(s.omega, 0.0);
  EXPECT_DOUBLE_EQ(s.t, 1e-3);
}

TEST(Step, RejectsBadTimeStep) {
  EXPECT_THROW(step(PlantState{}, {}, default_plant(), FrictionParams{}, 0.0), InvalidState);
  EXPECT_THROW(step(PlantState{}, {}, default_plant(), FrictionParams{}, -1e-3), InvalidState);
  EXPECT_THROW(step(PlantState{}, {}, default_plant(), FrictionParams{}, 0.02), InvalidState);
  EXPECT_NO_THROW(step(PlantState{}, {}, default_plant(), FrictionParams{}, 0.01));
}

TEST(Step, ReportsDivergenceTime) {
  PlantState s;
  s.theta = 1.5;
  s.omega = 50.0;
  try {
    step(s, {}, default_plant(), FrictionParams{}, 0.01);
    FAIL() << "expected divergence";
  } catch (const SimulationDiverged& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 0.01);
  }
}

TEST(Step, PinnedPendulumReturnsAfterOnePeriod) {
  PlantState s;
  s.theta = 0.1;
  const double T = 2.0 * std::numbers::pi * std::sqrt(0.5 / 9.81);
  EXPECT_NEAR(T, 1.4185, 1e-4);
  s = run(s, 0.0, default_plant(), frictionless(), 1e-3, 1.4185, CartMode::Pinned);
  EXPECT_NEAR(s.theta, 0.1, 1e-4);
}

TEST(Step, SmallAnglePeriodMatchesAnalytic) {
  const double T = 2.0 * std::numbers::pi * std::sqrt(0.5 / 9.81);
  EXPECT_NEAR(measured_period(0.01, 1e-3), T, 1e-3 * T);
}

TEST(Step, PinnedPendulumConservesEnergy) {
  const PlantParams p = default_plant();
  PlantState s;
  s.theta = 0.3;
  const double E0 = pendulum_energy(s, p);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = step(s, {}, p, frictionless(), 1e-3, CartMode::Pinned);
    worst = std::max(worst, std::abs(pendulum_energy(s, p) - E0) / E0);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Step, FrictionlessFreeCartConservesHorizontalMomentum) {
  const PlantParams p = default_plant();
  auto momentum = [&](const PlantState& s) {
    return (p.m + p.M_p) * s.v + p.M_p * p.L * s.omega * std::cos(s.theta);
  };
  PlantState s;
  s.v = 0.3;
  s.theta = 0.4;
  s.omega = -1.0;
  const double P0 = momentum(s);
  s = run(s, 0.0, p, frictionless(), 1e-3, 10.0);
  EXPECT_NEAR(momentum(s), P0, 1e-9 * std::abs(P0));
}

TEST(Step, FourthOrderConvergence) {
  const PlantParams p = default_plant();
  const FrictionParams fr{50.0, 0.0, 1e-3};
  auto endpoint = [&](double dt) {
    PlantState s;
    s.theta = 0.4;
    s.v = 0.2;
    return run(s, 40.0, p, fr, dt, 10.0);
  };
  const PlantState a = endpoint(0.01);
  const PlantState b = endpoint(0.005);
  const PlantState c = endpoint(0.0025);
  const double ratio = std::abs(a.theta - b.theta) / std::abs(b.theta - c.theta);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
  EXPECT_LE(std::abs(b.x - c.x), std::abs(a.x - b.x) / 16.0 * 1.25);
}

TEST(Friction, StictionCancelsSmallForce) {
  EXPECT_EQ(friction_force(0.0, 10.0, FrictionParams{50.0, 50.0, 1e-3}), -10.0);
}

TEST(Friction, PureViscous) {
  EXPECT_NEAR(friction_force(0.8, 0.0, FrictionParams{50.0, 0.0, 1e-3}), -40.0, 1e-12);
}

TEST(Friction, OpposesMotion) {
  EXPECT_NEAR(friction_force(-0.5, 0.0, FrictionParams{100.0, 30.0, 1e-3}), 80.0, 1e-9);
}

TEST(Friction, BreaksAwayAboveCoulombLevel) {
  const FrictionParams fr{50.0, 30.0, 1e-3};
  EXPECT_EQ(friction_force(0.0, 31.0, fr), 0.0);
  EXPECT_LT(friction_force(1e-4, 31.0, fr) + 31.0, 31.0);
}

TEST(Friction, StictionHoldsTheLift) {
  const PlantState s = run(PlantState{}, 25.0, default_plant(), FrictionParams{}, 1e-3, 5.0);
  EXPECT_EQ(s.x, 0.0);
  EXPECT_EQ(s.v, 0.0);
  EXPECT_EQ(s.theta, 0.0);
}

TEST(Energy, Examples) {
  const PlantParams p = default_plant();
  EXPECT_EQ(pendulum_energy(PlantState{}, p), 0.0);
  PlantState s;
  s.theta = std::numbers::pi / 2;
  EXPECT_NEAR(pendulum_energy(s, p), 637.65, 1e-9);
}

TEST(Energy, PositiveAwayFromRest) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const PlantParams p = default_plant();
  for (int i = 0; i < 500; ++i) {
    PlantState s;
    s.theta = u(rng);
    s.omega = u(rng);
    if (s.theta == 0.0 && s.omega == 0.0) continue;
    EXPECT_GT(pendulum_energy(s, p), 0.0);
  }
}

TEST(PlantParams, Validation) {
  PlantParams p;
  p.m = 0.0;
  EXPECT_THROW(p.validate(), InvalidState);
  p = {};
  p.M_p = -1.0;
  EXPECT_THROW(p.validate(), InvalidState);
  FrictionParams fr;
  fr.v_eps = 0.0;
  EXPECT_THROW(fr.validate(), InvalidState);
}
