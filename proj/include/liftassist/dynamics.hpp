#pragma once

// Longitudinal lift/patient model: a cart of mass m carrying a point-mass
// patient M_p hung on a massless rod of length L, driven by the caregiver,
// the motorised wheel and floor friction.

#include <cmath>
#include <numbers>
#include <string>

#include "liftassist/errors.hpp"

namespace liftassist {

inline constexpr double kGravity = 9.81;

struct PlantParams {
  double m = 100.0;   // lift, kg
  double M_p = 130.0; // patient, kg
  double L = 0.5;     // sling length, m
  double g = kGravity;

  void validate() const {
    if (!(m > 0.0) || !(M_p >= 0.0) || !(L > 0.0) || !(g > 0.0) ||
        !std::isfinite(m) || !std::isfinite(M_p) || !std::isfinite(L) || !std::isfinite(g)) {
      throw InvalidState("plant parameters out of range");
    }
  }
};

struct FrictionParams {
  double b_visc = 50.0;     // N s/m
  double F_coulomb = 30.0;  // N
  double v_eps = 1e-3;      // m/s

  void validate() const {
    if (!(b_visc >= 0.0) || !(F_coulomb >= 0.0) || !(v_eps > 0.0) ||
        !std::isfinite(b_visc) || !std::isfinite(F_coulomb) || !std::isfinite(v_eps)) {
      throw InvalidState("friction parameters out of range");
    }
  }
};

struct PlantState {
  double x = 0.0;      // m
  double v = 0.0;      // m/s
  double theta = 0.0;  // rad, from vertical
  double omega = 0.0;  // rad/s
  double t = 0.0;      // s

  bool finite() const {
    return std::isfinite(x) && std::isfinite(v) && std::isfinite(theta) &&
           std::isfinite(omega) && std::isfinite(t);
  }
};

struct ForceBreakdown {
  double F_user = 0.0;
  double F_motor = 0.0;
  double F_friction = 0.0;

  double total() const { return F_user + F_motor + F_friction; }
};

// Time derivative of (x, v, theta, omega).
struct PlantRates {
  double dx = 0.0;
  double dv = 0.0;
  double dtheta = 0.0;
  double domega = 0.0;
};

// Pinned holds the cart still (x'' = 0); used only for verification runs.
enum class CartMode { Free, Pinned };

namespace detail {

inline void require_upright(double theta, double t) {
  if (!(std::abs(theta) < std::numbers::pi / 2)) {
    throw SimulationDiverged("pendulum angle reached pi/2", t);
  }
}

}  // namespace detail

// Solves the 2x2 mass matrix for (x'', theta'') given the total external
// horizontal force on the cart.
inline PlantRates plant_derivatives(const PlantState& s, double F_ext, const PlantParams& p,
                                    CartMode mode = CartMode::Free) {
  if (!s.finite() || !std::isfinite(F_ext)) {
    throw InvalidState("non-finite plant state or force");
  }
  detail::require_upright(s.theta, s.t);

  const double st = std::sin(s.theta);
  const double ct = std::cos(s.theta);
  double xdd = 0.0;
  if (mode == CartMode::Free) {
    if (p.M_p == 0.0) {
      xdd = F_ext / p.m;
    } else {
      xdd = (F_ext + p.M_p * p.g * st * ct + p.M_p * p.L * s.omega * s.omega * st) /
            (p.m + p.M_p * st * st);
    }
  }
  const double thdd = -(xdd * ct + p.g * st) / p.L;
  return {mode == CartMode::Free ? s.v : 0.0, xdd, s.omega, thdd};
}

inline PlantRates plant_derivatives(const PlantState& s, const ForceBreakdown& f,
                                    const PlantParams& p, CartMode mode = CartMode::Free) {
  return plant_derivatives(s, f.total(), p, mode);
}

// Stiction holds the lift while the applied force stays under the dry-friction
// threshold; otherwise viscous plus tanh-regularised Coulomb drag.
inline double friction_force(double v, double F_applied, const FrictionParams& fr) {
  if (std::abs(v) < fr.v_eps && std::abs(F_applied) <= fr.F_coulomb) {
    return -F_applied;
  }
  return -fr.b_visc * v - fr.F_coulomb * std::tanh(v / fr.v_eps);
}

// Fixed-step RK4. Friction is re-evaluated at every stage from the stage
// velocity; forces.F_friction is ignored.
inline PlantState step(const PlantState& s, const ForceBreakdown& forces, const PlantParams& p,
                       const FrictionParams& fr, double dt, CartMode mode = CartMode::Free) {
  if (!(dt > 0.0) || dt > 0.01 + 1e-15) {
    throw InvalidState("time step must lie in (0, 0.01] s");
  }
  const double F_applied = forces.F_user + forces.F_motor;

  auto rates = [&](const PlantState& q) {
    const double F_fric = mode == CartMode::Free ? friction_force(q.v, F_applied, fr) : 0.0;
    return plant_derivatives(q, F_applied + F_fric, p, mode);
  };
  auto advance = [&](const PlantRates& k, double h) {
    PlantState q = s;
    q.x += h * k.dx;
    q.v += h * k.dv;
    q.theta += h * k.dtheta;
    q.omega += h * k.domega;
    q.t += h;
    return q;
  };

  const PlantRates k1 = rates(s);
  const PlantRates k2 = rates(advance(k1, dt / 2));
  const PlantRates k3 = rates(advance(k2, dt / 2));
  const PlantRates k4 = rates(advance(k3, dt));

  PlantState out = s;
  out.x += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.v += dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.theta += dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  out.omega += dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  out.t = s.t + dt;

  if (!out.finite()) {
    throw SimulationDiverged("non-finite plant state", out.t);
  }
  detail::require_upright(out.theta, out.t);
  return out;
}

// Pendulum energy in the cart frame. Only conserved when the cart is pinned.
inline double pendulum_energy(const PlantState& s, const PlantParams& p) {
  return 0.5 * p.M_p * p.L * p.L * s.omega * s.omega + p.M_p * p.g * p.L * (1.0 - std::cos(s.theta));
}

}  // namespace liftassist
