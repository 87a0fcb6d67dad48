#pragma once

// Closed-loop run of one scenario: at every step the caregiver force, then the
// assistance law, then the inner loop, then the plant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "liftassist/actuation.hpp"
#include "liftassist/controller_config.hpp"
#include "liftassist/controllers.hpp"
#include "liftassist/dynamics.hpp"
#include "liftassist/errors.hpp"
#include "liftassist/metrics.hpp"
#include "liftassist/virtual_user.hpp"

namespace liftassist {

struct SeriesBundle {
  double dt = 0.0;
  std::vector<double> t, x, v, theta, omega, F_user, F_motor, v_d, ax, az;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n) {
    for (auto* s : {&t, &x, &v, &theta, &omega, &F_user, &F_motor, &v_d, &ax, &az}) s->reserve(n);
  }
};

struct MetricsOptions {
  // Compute a_w and the effort integrals on the emulated 200 Hz IMU and
  // 10 Hz load-cell streams instead of the full-rate signals.
  bool sensor_emulation = false;
  ComfortWeights weights;
};

struct SimulationOutput {
  SeriesBundle series;
  RunMetrics metrics;
};

inline RunMetrics compute_metrics(const TaskScenario& sc, const SeriesBundle& s, const MetricsOptions& opt = {}) {
  RunMetrics m;
  const std::size_t n = s.size();
  TimeSeries ax(s.dt, s.ax, "m/s^2");
  TimeSeries az(s.dt, s.az, "m/s^2");
  TimeSeries F(s.dt, s.F_user, "N");
  TimeSeries T(s.dt, std::vector<double>(n, 0.0), "N m");
  if (opt.sensor_emulation) {
    const SensorRates rates;
    ax = moving_average(decimate(ax, rates.imu_hz), rates.imu_window);
    az = moving_average(decimate(az, rates.imu_hz), rates.imu_window);
    F = decimate(F, rates.force_hz);
    T = decimate(T, rates.force_hz);
  }
  const TimeSeries ay(ax.dt, std::vector<double>(ax.size(), 0.0), "m/s^2");
  m.a_w = overall_rms_acceleration(ax, ay, az, opt.weights);
  m.comfort_class = std::string(comfort_class(m.a_w));
  const auto eff = effort_integrals(F, T);
  m.int_F2 = eff.int_F2;
  m.int_T2 = eff.int_T2;

  switch (sc.goal.kind) {
    case GoalKind::Position:
      m.task_time = settling_time(n, s.dt, [&](std::size_t i) {
        return std::abs(s.x[i] - sc.goal.value) <= sc.goal.band;
      });
      m.overshoots = count_overshoots(TimeSeries(s.dt, s.x, "m"), sc.goal.value, sc.goal.band);
      break;
    case GoalKind::Velocity:
      m.task_time = settling_time(n, s.dt, [&](std::size_t i) {
        return std::abs(s.v[i] - sc.goal.value) <= sc.goal.band;
      });
      break;
    case GoalKind::None:
      m.task_time = s.t.back();
      break;
  }

  const auto iso = start_and_drive_forces(TimeSeries(s.dt, s.F_user, "N"), TimeSeries(s.dt, s.v, "m/s"));
  m.start_force = iso.start_force;
  m.peak_drive_force = iso.peak_drive_force;
  m.iso_start_pass = iso.start_pass;
  m.iso_drive_pass = iso.drive_pass;
  return m;
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

// Runs the scenario to completion. Divergence is reported with the scenario
// name attached.
inline SimulationOutput simulate(const TaskScenario& sc, const MetricsOptions& opt = {}) {
  sc.validate();
  const PlantParams plant = sc.plant_params();
  const ControllerConfig& cc = sc.controller;
  const double dt = sc.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(sc.duration / dt));

  PlantState state;
  state.v = sc.initial_velocity;

  ControllerState ctrl;
  ctrl.v_d = clamp_speed(sc.initial_velocity, cc.limits);
  ctrl.aux = ctrl.v_d;
  if (cc.velocity_commanded() && cc.loop.mode == VelocityLoopMode::ProportionalIntegral) {
    // Start the integral at the force that holds the initial speed.
    ctrl.i_term = std::clamp(-friction_force(state.v, 0.0, sc.friction), -cc.loop.integral_limit,
                             cc.loop.integral_limit);
  }

  std::optional<VirtualCaregiver> caregiver;
  const ForceProfile* profile = std::get_if<ForceProfile>(&sc.input);
  if (const auto* task = std::get_if<TrackingTask>(&sc.input)) {
    const double cap = cc.motorised() ? cc.limits.v_max : std::numeric_limits<double>::infinity();
    caregiver.emplace(task->user, task->reference, dt, cap);
  }

  SimulationOutput out;
  SeriesBundle& s = out.series;
  s.dt = dt;
  s.reserve(n_steps + 1);

  try {
    for (std::size_t k = 0; k <= n_steps; ++k) {
      state.t = static_cast<double>(k) * dt;
      const double F_user = caregiver ? caregiver->force(state) : profile->at(state.t);
      const double v_d_now = ctrl.v_d;

      double F_motor = 0.0;
      std::visit(detail::overloaded{
                     [&](const NoAssist&) { F_motor = 0.0; },
                     [&](const ForceAmp& l) {
                       F_motor = govern_speed(force_amplification(F_user, l.params, cc.limits), state.v, cc.limits);
                     },
                     [&](const FrictionComp& l) {
                       F_motor = govern_speed(friction_compensation(state.v, l.params, cc.limits), state.v, cc.limits);
                     },
                     [&](const auto& l) {
                       using L = std::decay_t<decltype(l)>;
                       if constexpr (std::is_same_v<L, Admittance>) {
                         ctrl = admittance_step(F_user, ctrl, l.params, dt);
                       } else if constexpr (std::is_same_v<L, VariableAdmittance>) {
                         ctrl = variable_admittance_step(F_user, ctrl, l.params, dt);
                       } else {
                         ctrl = second_order_step(F_user, ctrl, l.params, dt);
                         ctrl.aux = clamp_speed(ctrl.aux, cc.limits);
                       }
                       ctrl.v_d = clamp_speed(ctrl.v_d, cc.limits);
                       const PlantView view{state, F_user, plant, sc.friction};
                       const auto loop = velocity_loop_force(ctrl.v_d, state.v, VelocityLoopState{ctrl.i_term},
                                                             cc.loop, cc.limits, dt, &view);
                       F_motor = loop.F_motor;
                       ctrl.i_term = loop.state.integral;
                     }},
                 cc.law);

      const double F_applied = F_user + F_motor;
      const PlantRates r = plant_derivatives(state, F_applied + friction_force(state.v, F_applied, sc.friction), plant);
      KinematicSample ks{state, r.dv, r.domega};
      const auto [a_x, a_z] = bob_acceleration(ks, plant);

      s.t.push_back(state.t);
      s.x.push_back(state.x);
      s.v.push_back(state.v);
      s.theta.push_back(state.theta);
      s.omega.push_back(state.omega);
      s.F_user.push_back(F_user);
      s.F_motor.push_back(F_motor);
      s.v_d.push_back(v_d_now);
      s.ax.push_back(a_x);
      s.az.push_back(a_z);

      if (k < n_steps) {
        state = step(state, ForceBreakdown{F_user, F_motor, 0.0}, plant, sc.friction, dt);
      }
    }
  } catch (const SimulationDiverged& e) {
    throw SimulationDiverged("scenario '" + sc.name + "' with controller '" + cc.name + "' diverged at t=" +
                                 std::to_string(e.time()) + " s: " + e.what(),
                             e.time());
  } catch (const InvalidState& e) {
    throw SimulationDiverged("scenario '" + sc.name + "' with controller '" + cc.name +
                                 "' left the finite state space at t=" + std::to_string(state.t) + " s: " + e.what(),
                             state.t);
  }

  out.metrics = compute_metrics(sc, s, opt);
  return out;
}

}  // namespace liftassist
