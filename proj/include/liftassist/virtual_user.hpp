#pragma once

// Handle-force inputs: open-loop force profiles and a virtual caregiver that
// tracks a reference motion with a clamped proportional law and a reaction
// delay.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "liftassist/controller_config.hpp"
#include "liftassist/dynamics.hpp"
#include "liftassist/errors.hpp"
#include "liftassist/metrics.hpp"

namespace liftassist {

// None of these constants come from measurements of real caregivers.
struct UserModel {
  double Kp_u = 80.0;           // N per m/s
  double Kx_u = 20.0;           // N per m
  double F_user_max = 200.0;    // N
  double reaction_delay = 0.2;  // s
  // While the lift sits at its speed cap the caregiver lets go of distance it
  // cannot make up; the lost lead decays with this time constant.
  double release_time = 0.5;    // s

  void validate() const {
    if (!(Kp_u >= 0.0) || !(Kx_u >= 0.0) || !(F_user_max > 0.0) || !(reaction_delay >= 0.0) ||
        !(release_time > 0.0)) {
      throw ConfigError("user model gains must be >= 0 and F_user_max > 0");
    }
  }
};

struct Knot {
  double t = 0.0;
  double value = 0.0;
};

namespace detail {

inline void validate_knots(const std::vector<Knot>& knots, const char* what) {
  if (knots.empty()) throw ConfigError(std::string(what) + " needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].t) || !std::isfinite(knots[i].value)) {
      throw ConfigError(std::string(what) + " knot is not finite");
    }
    if (i > 0 && !(knots[i].t > knots[i - 1].t)) {
      throw ConfigError(std::string(what) + " knot times must increase");
    }
  }
}

// Piecewise-linear interpolation, held constant outside the knot range.
inline double interpolate(const std::vector<Knot>& k, double t) {
  if (t <= k.front().t) return k.front().value;
  if (t >= k.back().t) return k.back().value;
  auto it = std::upper_bound(k.begin(), k.end(), t, [](double tt, const Knot& n) { return tt < n.t; });
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  return a.value + (b.value - a.value) * (t - a.t) / (b.t - a.t);
}

}  // namespace detail

struct ReferenceSample {
  double x_ref = 0.0;
  double v_ref = 0.0;
};

// Velocity profile given by piecewise-linear knots (trapezoids in practice);
// the position target is its integral from the start of the run.
class Reference {
public:
  Reference() : Reference(std::vector<Knot>{{0.0, 0.0}}) {}

  explicit Reference(std::vector<Knot> velocity_knots, double x0 = 0.0)
      : knots_(std::move(velocity_knots)), x0_(x0) {
    detail::validate_knots(knots_, "reference");
    cumulative_.assign(knots_.size(), x0_);
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] +
                       0.5 * (knots_[i - 1].value + knots_[i].value) * (knots_[i].t - knots_[i - 1].t);
    }
  }

  // Trapezoid 0 -> v_peak -> 0 covering `distance`, starting at t0.
  static Reference point_to_point(double distance, double v_peak, double accel, double t0 = 0.0) {
    const double ramp = v_peak / accel;
    const double cruise = (distance - v_peak * ramp) / v_peak;
    if (cruise < 0.0) throw ConfigError("point-to-point move too short for its speed profile");
    std::vector<Knot> k{{t0, 0.0}, {t0 + ramp, v_peak}, {t0 + ramp + cruise, v_peak}, {t0 + 2 * ramp + cruise, 0.0}};
    if (t0 > 0.0) k.insert(k.begin(), Knot{0.0, 0.0});
    return Reference(std::move(k));
  }

  ReferenceSample sample(double t) const {
    const double v = detail::interpolate(knots_, t);
    if (t <= knots_.front().t) return {x0_ + knots_.front().value * (t - knots_.front().t), v};
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double tt, const Knot& n) { return tt < n.t; });
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double x = cumulative_[i] + 0.5 * (knots_[i].value + v) * (t - knots_[i].t);
    return {x, v};
  }

  double peak_speed() const {
    double p = 0.0;
    for (const auto& k : knots_) p = std::max(p, std::abs(k.value));
    return p;
  }

  double final_position() const { return cumulative_.back(); }
  const std::vector<Knot>& knots() const { return knots_; }
  double x0() const { return x0_; }

private:
  std::vector<Knot> knots_;
  std::vector<double> cumulative_;
  double x0_;
};

// Clamped proportional tracking of (x_ref, v_ref) on an already delayed state.
inline double user_force(const ReferenceSample& ref, const PlantState& observed, const UserModel& model) {
  const double F = model.Kx_u * (ref.x_ref - observed.x) + model.Kp_u * (ref.v_ref - observed.v);
  return std::clamp(F, -model.F_user_max, model.F_user_max);
}

inline double user_force(double t, const PlantState& observed, const UserModel& model, const Reference& ref) {
  return user_force(ref.sample(t), observed, model);
}

// Stateful caregiver: keeps the observation history for the reaction delay
// (zero-order hold) and the speed-cap release of accumulated lead.
class VirtualCaregiver {
public:
  VirtualCaregiver(UserModel model, Reference reference, double dt,
                   double speed_cap = std::numeric_limits<double>::infinity())
      : model_(model), reference_(std::move(reference)), dt_(dt), speed_cap_(speed_cap) {
    model_.validate();
    delay_steps_ = static_cast<std::size_t>(std::llround(model_.reaction_delay / dt_));
  }

  double force(const PlantState& current) {
    history_.push_back(current);
    if (history_.size() > delay_steps_ + 1) history_.pop_front();
    const PlantState& seen = history_.front();

    ReferenceSample ref = reference_.sample(current.t);
    ref.x_ref -= released_;
    const double lead = ref.x_ref - seen.x;
    const bool capped = std::abs(seen.v) >= speed_cap_ - kCapTolerance && lead * seen.v > 0.0 &&
                        ref.v_ref * seen.v > 0.0;
    const double F = user_force(ref, seen, model_);
    if (capped) released_ += lead / model_.release_time * dt_;
    return F;
  }

  const UserModel& model() const { return model_; }
  const Reference& reference() const { return reference_; }

  static constexpr double kCapTolerance = 2e-3;  // m/s

private:
  UserModel model_;
  Reference reference_;
  double dt_;
  double speed_cap_;
  std::size_t delay_steps_ = 0;
  std::deque<PlantState> history_;
  double released_ = 0.0;
};

struct ForceProfile {
  std::vector<Knot> knots;  // N vs s, piecewise linear, held after the last knot

  double at(double t) const { return detail::interpolate(knots, t); }
  void validate() const { detail::validate_knots(knots, "force profile"); }
};

struct TrackingTask {
  Reference reference;
  UserModel user;
};

using UserInput = std::variant<ForceProfile, TrackingTask>;

enum class GoalKind { None, Position, Velocity };

// What "done" means for task time and overshoot counting.
struct TaskGoal {
  GoalKind kind = GoalKind::None;
  double value = 0.0;
  double band = kOvershootBand;
};

struct TaskScenario {
  std::string name;
  double M_p = 130.0;
  FrictionParams friction;
  ControllerConfig controller;
  UserInput input = ForceProfile{{{0.0, 0.0}}};
  TaskGoal goal;
  double duration = 10.0;
  double dt = 1e-3;
  double initial_velocity = 0.0;
  PlantParams plant;  // M_p here is overwritten by the field above

  PlantParams plant_params() const {
    PlantParams p = plant;
    p.M_p = M_p;
    return p;
  }

  void validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be positive");
    if (!(dt > 0.0) || dt > 0.01) throw ConfigError("dt must lie in (0, 0.01] s");
    if (!(M_p >= 0.0) || M_p > 272.0) throw ConfigError("patient mass must lie in [0, 272] kg");
    if (!std::isfinite(initial_velocity)) throw ConfigError("initial velocity must be finite");
    if (goal.kind != GoalKind::None && !(goal.band > 0.0)) throw ConfigError("goal band must be positive");
    try {
      plant_params().validate();
      friction.validate();
    } catch (const InvalidState& e) {
      throw ConfigError(e.what());
    }
    controller.validate();
    std::visit(
        [](const auto& in) {
          if constexpr (std::is_same_v<std::decay_t<decltype(in)>, ForceProfile>) {
            in.validate();
          } else {
            in.user.validate();
          }
        },
        input);
  }
};

inline constexpr double kDefaultRampAccel = 0.4;  // m/s^2

// Library scenarios, each of which can be paired with any controller preset.
inline constexpr std::array<std::string_view, 7> kScenarioNames = {
    "cruise",        "reversal",     "point_to_point",       "sensitivity_A",
    "sensitivity_B", "comfort_step", "unstable_compensation"};

inline TaskScenario scenario_preset(std::string_view name, std::string_view controller = "no_assist") {
  TaskScenario s;
  s.name = std::string(name);
  s.controller = controller_preset(controller);
  const double v_max = s.controller.limits.v_max;
  const double ramp = v_max / kDefaultRampAccel;

  if (name == "cruise") {
    s.input = TrackingTask{Reference({{0.0, 0.0}, {ramp, v_max}, {12.0, v_max}, {12.0 + ramp, 0.0}}), {}};
    s.goal = {GoalKind::Velocity, 0.0, kMotionThreshold};
    s.duration = 22.0;
  } else if (name == "reversal") {
    s.input = TrackingTask{
        Reference({{0.0, 0.0}, {ramp, v_max}, {8.0, v_max}, {8.0 + 2.0 * ramp, -v_max}, {22.0, -v_max}}), {}};
    s.goal = {GoalKind::Velocity, -v_max, kMotionThreshold};
    s.duration = 22.0;
  } else if (name == "point_to_point") {
    s.input = TrackingTask{Reference::point_to_point(3.0, 0.5, kDefaultRampAccel), {}};
    s.goal = {GoalKind::Position, 3.0, kOvershootBand};
    s.duration = 20.0;
  } else if (name == "sensitivity_A" || name == "sensitivity_B") {
    const bool a = name == "sensitivity_A";
    s.M_p = a ? 90.0 : 272.0;
    s.friction.b_visc = a ? 50.0 : 100.0;
    s.input = ForceProfile{{{0.0, 30.0}}};
    s.duration = 40.0;
  } else if (name == "comfort_step") {
    // Force step that drives a fixed admittance with the default b0 to v_max.
    s.input = ForceProfile{{{0.0, kDefaultB0 * v_max}}};
    s.duration = 10.0;
  } else if (name == "unstable_compensation") {
    s.M_p = 0.0;
    s.friction = {50.0, 0.0, 1e-3};
    s.initial_velocity = 0.01;
    s.input = ForceProfile{{{0.0, 0.0}}};
    s.duration = 60.0;
  } else {
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace liftassist
