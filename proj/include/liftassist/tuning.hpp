#pragma once

// Picks the smallest admittance time constant whose step response keeps the
// patient's overall rms acceleration under the comfort limit.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "liftassist/controller_config.hpp"
#include "liftassist/errors.hpp"
#include "liftassist/metrics.hpp"
#include "liftassist/simulation.hpp"
#include "liftassist/virtual_user.hpp"

namespace liftassist {

struct TuningOptions {
  double tau_min = 0.05;   // s
  double tau_max = 10.0;   // s
  double tolerance = 1e-3; // s
  int scan_points = 25;    // log-spaced monotonicity scan
  MetricsOptions metrics;
};

struct TuningResult {
  double tau = 0.0;
  double a_w = 0.0;            // at tau
  double a_w_below = 0.0;      // at the lower end of the final bracket
  bool monotone = true;        // a_w non-increasing over the scan
  int simulations = 0;
};

// Comfort step for a fixed admittance with time constant tau: a held force of
// b0 * v_max, i.e. the step that carries the lift to top speed.
inline TaskScenario comfort_step_scenario(double M_p, double b0, double tau, const TaskScenario& base) {
  TaskScenario sc = base;
  sc.M_p = M_p;
  Admittance law{AdmittanceParams::from_tau(tau, b0)};
  sc.controller.law = law;
  sc.controller.name = "admittance";
  sc.input = ForceProfile{{{0.0, b0 * sc.controller.limits.v_max}}};
  return sc;
}

inline double comfort_step_a_w(double M_p, double b0, double tau, const TaskScenario& base,
                               const MetricsOptions& opt = {}) {
  return simulate(comfort_step_scenario(M_p, b0, tau, base), opt).metrics.a_w;
}

// Log-spaced scan locates the first feasible grid point, then bisection
// narrows the bracket below it to `tolerance`. Throws InfeasibleTuning when
// even tau_max misses the limit.
inline TuningResult tune_time_constant(double M_p, double b0, double comfort_limit, const TaskScenario& base,
                                       const TuningOptions& opt = {}) {
  if (!(comfort_limit > 0.0)) throw ConfigError("comfort limit must be positive");
  TuningResult r;
  auto a_w = [&](double tau) {
    ++r.simulations;
    return comfort_step_a_w(M_p, b0, tau, base, opt.metrics);
  };

  const double lo_val = a_w(opt.tau_min);
  if (lo_val <= comfort_limit) {
    r.tau = opt.tau_min;
    r.a_w = lo_val;
    r.a_w_below = lo_val;
    return r;
  }

  std::vector<double> grid(static_cast<std::size_t>(opt.scan_points));
  std::vector<double> vals(grid.size());
  const double ratio = std::log(opt.tau_max / opt.tau_min) / (opt.scan_points - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = i + 1 == grid.size() ? opt.tau_max : opt.tau_min * std::exp(ratio * static_cast<double>(i));
    vals[i] = i == 0 ? lo_val : a_w(grid[i]);
    if (i > 0 && vals[i] > vals[i - 1] * (1.0 + 1e-9)) r.monotone = false;
  }
  if (vals.back() > comfort_limit) {
    throw InfeasibleTuning("no time constant up to " + std::to_string(opt.tau_max) +
                               " s meets the comfort limit (a_w=" + std::to_string(vals.back()) + ")",
                           vals.back());
  }

  std::size_t first = 1;
  while (vals[first] > comfort_limit) ++first;
  double lo = grid[first - 1];
  double hi = grid[first];
  double hi_val = vals[first];
  double lo_v = vals[first - 1];
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double v = a_w(mid);
    if (v <= comfort_limit) {
      hi = mid;
      hi_val = v;
    } else {
      lo = mid;
      lo_v = v;
    }
  }
  r.tau = hi;
  r.a_w = hi_val;
  r.a_w_below = lo_v;
  return r;
}

inline TuningResult tune_time_constant(double M_p, double b0 = kDefaultB0, double comfort_limit = kComfortLimit) {
  return tune_time_constant(M_p, b0, comfort_limit, scenario_preset("comfort_step", "admittance"));
}

}  // namespace liftassist
