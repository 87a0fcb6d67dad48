#pragma once

// Assistance laws: fixed admittance, variable-damping admittance,
// critically damped second-order admittance, force amplification and
// friction compensation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "liftassist/actuation.hpp"
#include "liftassist/errors.hpp"

namespace liftassist {

// Ratio between the 95% settling times of a critically damped double pole and
// a first-order lag: 1 - (1 + x) e^-x = 0.95 at x = 4.744, versus 3 tau.
inline constexpr double kSecondOrderSettlingRatio = 3.0 / 4.744;

inline constexpr double kDefaultB0 = 37.5;  // N s/m, 30 N for 0.8 m/s

// Velocities below this are treated as "stopped" when picking the damping.
inline constexpr double kSignDeadband = 1e-3;

struct AdmittanceParams {
  double M_v = kDefaultB0;  // virtual mass, kg
  double b0 = kDefaultB0;   // N s/m

  double gain() const { return 1.0 / b0; }
  double tau() const { return M_v / b0; }

  static AdmittanceParams from_tau(double tau, double b0 = kDefaultB0) { return {tau * b0, b0}; }

  void validate() const {
    if (!(M_v > 0.0) || !(b0 > 0.0)) throw ConfigError("admittance needs M_v > 0 and b0 > 0");
  }
};

struct VariableAdmittanceParams {
  double M_v = kDefaultB0;
  double b0 = kDefaultB0;
  double F0 = 30.0;  // N

  double alpha() const { return 6.0 * b0; }
  double beta() const { return 5.0 * b0 / F0; }

  static VariableAdmittanceParams from_tau(double tau, double b0 = kDefaultB0, double F0 = 30.0) {
    return {tau * b0, b0, F0};
  }

  void validate() const {
    if (!(M_v > 0.0) || !(b0 > 0.0) || !(F0 > 0.0)) {
      throw ConfigError("variable admittance needs M_v, b0, F0 > 0");
    }
  }
};

// V/F = K / (1 + tau2 s)^2
struct SecondOrderParams {
  double K = 1.0 / kDefaultB0;
  double tau2 = kSecondOrderSettlingRatio;

  // Same DC gain and 95% settling time as a first-order law with this tau.
  static SecondOrderParams matched_to(const AdmittanceParams& first) {
    return {first.gain(), first.tau() * kSecondOrderSettlingRatio};
  }

  void validate() const {
    if (!(K > 0.0) || !(tau2 > 0.0)) throw ConfigError("second-order law needs K > 0, tau2 > 0");
  }
};

struct ForceAmpParams {
  double G = 4.0 / 3.0;

  void validate() const {
    if (!(G >= 0.0)) throw ConfigError("amplification gain must be >= 0");
  }
};

struct FrictionCompParams {
  double b_hat = 60.0;
  double Fc_hat = 0.0;
  double v_eps = 1e-3;

  void validate() const {
    if (!(b_hat >= 0.0) || !(Fc_hat >= 0.0) || !(v_eps > 0.0)) {
      throw ConfigError("friction estimates must be >= 0");
    }
  }
};

struct ControllerState {
  double v_d = 0.0;     // m/s
  double aux = 0.0;     // first stage of the second-order law, m/s
  double i_term = 0.0;  // inner-loop integral, N
};

namespace detail {

// One RK4 step of a scalar ODE y' = f(y) with frozen input.
template <typename F>
double rk4_scalar(double y, double dt, F&& f) {
  const double k1 = f(y);
  const double k2 = f(y + dt / 2 * k1);
  const double k3 = f(y + dt / 2 * k2);
  const double k4 = f(y + dt * k3);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void require_positive_dt(double dt) {
  if (!(dt > 0.0)) throw InvalidState("controller time step must be positive");
}

inline double sign_with_deadband(double v) {
  if (std::abs(v) < kSignDeadband) return 0.0;
  return v > 0.0 ? 1.0 : -1.0;
}

}  // namespace detail

// M_v v_d' = F - b0 v_d
inline ControllerState admittance_step(double F_user, ControllerState st, const AdmittanceParams& p,
                                       double dt) {
  detail::require_positive_dt(dt);
  st.v_d = detail::rk4_scalar(st.v_d, dt, [&](double v) { return (F_user - p.b0 * v) / p.M_v; });
  return st;
}

// Damping b = 6 b0 - sign(V) (5 b0 / F0) F inside |F| <= F0, b0 outside.
// sign(V) is zero inside the deadband, giving 6 b0 at rest.
inline double variable_damping(double F, double V, const VariableAdmittanceParams& p) {
  if (std::abs(F) > p.F0) return p.b0;
  return p.alpha() - detail::sign_with_deadband(V) * p.beta() * F;
}

// M_v v_d' = F - b(F, v_d) v_d, damping re-evaluated at every RK4 stage.
inline ControllerState variable_admittance_step(double F_user, ControllerState st,
                                                const VariableAdmittanceParams& p, double dt) {
  detail::require_positive_dt(dt);
  st.v_d = detail::rk4_scalar(st.v_d, dt, [&](double v) {
    return (F_user - variable_damping(F_user, v, p) * v) / p.M_v;
  });
  return st;
}

// Two cascaded first-order lags with equal time constants.
inline ControllerState second_order_step(double F_user, ControllerState st,
                                         const SecondOrderParams& p, double dt) {
  detail::require_positive_dt(dt);
  const double target = p.K * F_user;
  // Both stages advance together so the pair is one RK4 step of a 2-state ODE.
  auto f = [&](double aux, double vd) {
    return std::pair{(target - aux) / p.tau2, (aux - vd) / p.tau2};
  };
  const auto [a1, v1] = f(st.aux, st.v_d);
  const auto [a2, v2] = f(st.aux + dt / 2 * a1, st.v_d + dt / 2 * v1);
  const auto [a3, v3] = f(st.aux + dt / 2 * a2, st.v_d + dt / 2 * v2);
  const auto [a4, v4] = f(st.aux + dt * a3, st.v_d + dt * v3);
  st.aux += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  st.v_d += dt / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
  return st;
}

inline double force_amplification(double F_user, const ForceAmpParams& p, const MotorLimits& limits) {
  return std::clamp(p.G * F_user, -limits.F_max, limits.F_max);
}

inline double friction_compensation(double v, const FrictionCompParams& p, const MotorLimits& limits) {
  return std::clamp(p.b_hat * v + p.Fc_hat * std::tanh(v / p.v_eps), -limits.F_max, limits.F_max);
}

enum class AdmittanceKind { Fixed, Variable };

// Terminal speed under a held force. The variable case solves
// V (6 b0 - sign(V) beta F) = F with sign(V) = sign(F) in closed form:
// V = F / (6 b0 - beta |F|) for |F| <= F0, F / b0 beyond.
inline double steady_state_velocity(double F, AdmittanceKind kind, double b0, double F0,
                                    const MotorLimits& limits) {
  if (F == 0.0) return 0.0;
  double v = 0.0;
  if (kind == AdmittanceKind::Fixed || std::abs(F) > F0) {
    v = F / b0;
  } else {
    const double b = 6.0 * b0 - (5.0 * b0 / F0) * std::abs(F);
    v = F / b;
  }
  return clamp_speed(v, limits);
}

inline double steady_state_velocity(double F, const AdmittanceParams& p, const MotorLimits& limits) {
  return steady_state_velocity(F, AdmittanceKind::Fixed, p.b0, std::numeric_limits<double>::infinity(),
                               limits);
}

inline double steady_state_velocity(double F, const VariableAdmittanceParams& p,
                                    const MotorLimits& limits) {
  return steady_state_velocity(F, AdmittanceKind::Variable, p.b0, p.F0, limits);
}

// Force-amplification gain that makes a held force F_ref reach v_target on a
// floor with the given friction: (1 + G) F_ref = b v + F_c.
inline ForceAmpParams matched_force_amp(double F_ref, double v_target, const FrictionParams& fr) {
  return {std::max(0.0, (fr.b_visc * v_target + fr.F_coulomb) / F_ref - 1.0)};
}

}  // namespace liftassist
