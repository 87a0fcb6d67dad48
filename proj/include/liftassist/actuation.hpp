#pragma once

// Motorised-wheel inner loops. The current/PWM stage is folded into an ideal
// force source bounded by F_max.

#include <algorithm>
#include <cmath>

#include "liftassist/dynamics.hpp"
#include "liftassist/errors.hpp"

namespace liftassist {

struct MotorLimits {
  double F_max = 250.0;  // N
  double v_max = 0.8;    // m/s

  void validate() const {
    if (!(F_max > 0.0) || !(v_max > 0.0) || !std::isfinite(F_max) || !std::isfinite(v_max)) {
      throw ConfigError("motor limits must be positive and finite");
    }
  }
};

enum class VelocityLoopMode { IdealTracking, ProportionalIntegral };

struct VelocityLoopParams {
  VelocityLoopMode mode = VelocityLoopMode::ProportionalIntegral;
  double Kp = 2000.0;            // N per m/s
  double Ki = 4000.0;            // N per m
  double integral_limit = 250.0; // N

  void validate() const {
    if (!(Kp >= 0.0) || !(Ki >= 0.0) || !(integral_limit >= 0.0)) {
      throw ConfigError("velocity loop gains must be non-negative");
    }
  }
};

struct VelocityLoopState {
  double integral = 0.0;  // N
};

// What the ideal-tracking loop needs to know about the plant to invert one
// integration step.
struct PlantView {
  PlantState state;
  double F_user = 0.0;
  PlantParams params;
  FrictionParams friction;
};

struct LoopOutput {
  double F_motor = 0.0;
  VelocityLoopState state;
};

inline double clamp_speed(double v_desired, const MotorLimits& limits) {
  return std::clamp(v_desired, -limits.v_max, limits.v_max);
}

// Motor force that lands the plant on v_target after one step of length dt,
// saturated at +/-F_max. The step map is monotone in F_motor, so a bracketed
// secant (Illinois) search converges reliably.
inline double ideal_tracking_force(double v_target, const PlantView& plant,
                                   const MotorLimits& limits, double dt) {
  auto residual = [&](double F) {
    const ForceBreakdown f{plant.F_user, F, 0.0};
    return step(plant.state, f, plant.params, plant.friction, dt).v - v_target;
  };

  double lo = -limits.F_max;
  double hi = limits.F_max;
  double r_lo = residual(lo);
  double r_hi = residual(hi);
  if (r_hi <= 0.0) return hi;
  if (r_lo >= 0.0) return lo;

  const double m_eff = plant.params.m + plant.params.M_p;
  double guess = std::clamp(m_eff * (v_target - plant.state.v) / dt, lo, hi);
  double r_guess = residual(guess);
  if (r_guess == 0.0) return guess;
  if (r_guess < 0.0) {
    lo = guess;
    r_lo = r_guess;
  } else {
    hi = guess;
    r_hi = r_guess;
  }

  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    const double F = (lo * r_hi - hi * r_lo) / (r_hi - r_lo);
    const double r = residual(F);
    if (std::abs(r) < 1e-13 || hi - lo < 1e-12) return F;
    if (r < 0.0) {
      lo = F;
      r_lo = r;
      if (side == -1) r_hi /= 2.0;
      side = -1;
    } else {
      hi = F;
      r_hi = r;
      if (side == 1) r_lo /= 2.0;
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

// PI mode: F = clamp(Kp e + I, +/-F_max) with the integral clamped to
// +/-integral_limit. The output uses the integral held on entry.
inline LoopOutput velocity_loop_force(double v_desired, double v_actual, VelocityLoopState loop,
                                      const VelocityLoopParams& params, const MotorLimits& limits,
                                      double dt, const PlantView* plant = nullptr) {
  if (params.mode == VelocityLoopMode::IdealTracking) {
    if (plant == nullptr) {
      throw ConfigError("ideal-tracking velocity loop needs the plant state");
    }
    return {ideal_tracking_force(v_desired, *plant, limits, dt), loop};
  }
  const double e = v_desired - v_actual;
  const double F = std::clamp(params.Kp * e + loop.integral, -limits.F_max, limits.F_max);
  loop.integral = std::clamp(loop.integral + params.Ki * e * dt, -params.integral_limit,
                             params.integral_limit);
  return {F, loop};
}

// Software speed cap for force-mode assistance: no drive force that would push
// the lift further past v_max.
inline double govern_speed(double F_d, double v, const MotorLimits& limits) {
  if (std::abs(v) >= limits.v_max && F_d * v > 0.0) return 0.0;
  return F_d;
}

}  // namespace liftassist
