#pragma once

// JSON run configuration. Unknown keys and wrong types are errors, so a typo
// never silently falls back to a default.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "liftassist/controller_config.hpp"
#include "liftassist/errors.hpp"
#include "liftassist/simulation.hpp"
#include "liftassist/tuning.hpp"
#include "liftassist/virtual_user.hpp"

namespace liftassist::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct RunSpec {
  TaskScenario scenario;
  json echo;  // the run entry as written, for the report
};

struct TuneSpec {
  std::vector<double> masses{80.0, 130.0, 180.0, 272.0};
  double b0 = kDefaultB0;
  double comfort_limit = kComfortLimit;
  TuningOptions options;
};

struct HarnessConfig {
  std::vector<RunSpec> runs;
  std::string baseline = "no_assist";
  bool series = false;
  MetricsOptions metrics;
  TuneSpec tune;
};

namespace detail {

inline std::string where(std::string_view ctx, std::string_view key) {
  return ctx.empty() ? std::string(key) : std::string(ctx) + "." + std::string(key);
}

inline void require_object(const json& j, std::string_view ctx) {
  if (!j.is_object()) throw ConfigError(std::string(ctx.empty() ? "config" : ctx) + " must be an object");
}

inline void allow_keys(const json& j, std::string_view ctx, std::initializer_list<std::string_view> keys) {
  require_object(j, ctx);
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : keys) ok = ok || a == k;
    if (!ok) throw ConfigError("unknown key '" + where(ctx, k) + "'");
  }
}

inline double number(const json& j, std::string_view ctx) {
  if (!j.is_number()) throw ConfigError("'" + std::string(ctx) + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("'" + std::string(ctx) + "' must be finite");
  return v;
}

inline void read(const json& j, std::string_view ctx, std::string_view key, double& out) {
  if (j.contains(key)) out = number(j.at(key), where(ctx, key));
}

inline void read(const json& j, std::string_view ctx, std::string_view key, bool& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) throw ConfigError("'" + where(ctx, key) + "' must be a boolean");
  out = j.at(key).get<bool>();
}

inline std::string text(const json& j, std::string_view ctx) {
  if (!j.is_string()) throw ConfigError("'" + std::string(ctx) + "' must be a string");
  return j.get<std::string>();
}

inline std::vector<Knot> knots(const json& j, std::string_view ctx) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + std::string(ctx) + "' must be a non-empty array of [t, value]");
  std::vector<Knot> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("'" + std::string(ctx) + "' entries must be [t, value]");
    out.push_back({number(p[0], ctx), number(p[1], ctx)});
  }
  return out;
}

inline void apply_friction(const json& j, FrictionParams& f, std::string_view ctx) {
  allow_keys(j, ctx, {"b_visc", "F_coulomb", "v_eps"});
  read(j, ctx, "b_visc", f.b_visc);
  read(j, ctx, "F_coulomb", f.F_coulomb);
  read(j, ctx, "v_eps", f.v_eps);
}

inline void apply_user(const json& j, UserModel& u, std::string_view ctx) {
  allow_keys(j, ctx, {"Kp_u", "Kx_u", "F_user_max", "reaction_delay", "release_time"});
  read(j, ctx, "Kp_u", u.Kp_u);
  read(j, ctx, "Kx_u", u.Kx_u);
  read(j, ctx, "F_user_max", u.F_user_max);
  read(j, ctx, "reaction_delay", u.reaction_delay);
  read(j, ctx, "release_time", u.release_time);
}

inline void apply_law_params(const json& j, ControlLaw& law, std::string_view ctx) {
  std::visit(
      [&](auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, NoAssist>) {
          allow_keys(j, ctx, {});
        } else if constexpr (std::is_same_v<L, ForceAmp>) {
          allow_keys(j, ctx, {"G"});
          read(j, ctx, "G", l.params.G);
        } else if constexpr (std::is_same_v<L, FrictionComp>) {
          allow_keys(j, ctx, {"b_hat", "Fc_hat", "v_eps"});
          read(j, ctx, "b_hat", l.params.b_hat);
          read(j, ctx, "Fc_hat", l.params.Fc_hat);
          read(j, ctx, "v_eps", l.params.v_eps);
        } else if constexpr (std::is_same_v<L, Admittance>) {
          allow_keys(j, ctx, {"M_v", "b0", "tau"});
          if (j.contains("tau") && j.contains("M_v")) throw ConfigError("'" + std::string(ctx) + "' takes tau or M_v, not both");
          read(j, ctx, "b0", l.params.b0);
          if (j.contains("tau")) {
            l.params = AdmittanceParams::from_tau(number(j.at("tau"), where(ctx, "tau")), l.params.b0);
          } else if (j.contains("M_v")) {
            read(j, ctx, "M_v", l.params.M_v);
          } else {
            l.params = AdmittanceParams::from_tau(kDefaultTau, l.params.b0);
          }
        } else if constexpr (std::is_same_v<L, VariableAdmittance>) {
          allow_keys(j, ctx, {"M_v", "b0", "F0", "tau"});
          if (j.contains("tau") && j.contains("M_v")) throw ConfigError("'" + std::string(ctx) + "' takes tau or M_v, not both");
          read(j, ctx, "b0", l.params.b0);
          read(j, ctx, "F0", l.params.F0);
          if (j.contains("tau")) {
            l.params = VariableAdmittanceParams::from_tau(number(j.at("tau"), where(ctx, "tau")), l.params.b0, l.params.F0);
          } else if (j.contains("M_v")) {
            read(j, ctx, "M_v", l.params.M_v);
          } else {
            l.params = VariableAdmittanceParams::from_tau(kDefaultTau, l.params.b0, l.params.F0);
          }
        } else {
          // Either explicit (K, tau2) or matched to a first-order (tau, b0).
          allow_keys(j, ctx, {"K", "tau2", "tau", "b0"});
          const bool matched = j.contains("tau") || j.contains("b0");
          if (matched && (j.contains("K") || j.contains("tau2"))) {
            throw ConfigError("'" + std::string(ctx) + "' takes (tau, b0) or (K, tau2), not both");
          }
          if (matched) {
            double tau = kDefaultTau;
            double b0 = kDefaultB0;
            read(j, ctx, "tau", tau);
            read(j, ctx, "b0", b0);
            l.params = SecondOrderParams::matched_to(AdmittanceParams::from_tau(tau, b0));
          } else {
            read(j, ctx, "K", l.params.K);
            read(j, ctx, "tau2", l.params.tau2);
          }
        }
      },
      law);
}

inline ControllerConfig parse_controller(const json& j, std::string_view ctx) {
  if (j.is_string()) return controller_preset(j.get<std::string>());
  allow_keys(j, ctx, {"name", "params", "limits", "loop"});
  if (!j.contains("name")) throw ConfigError("'" + std::string(ctx) + "' needs a name");
  ControllerConfig c = controller_preset(text(j.at("name"), where(ctx, "name")));
  if (j.contains("params")) apply_law_params(j.at("params"), c.law, where(ctx, "params"));
  if (j.contains("limits")) {
    const auto lctx = where(ctx, "limits");
    allow_keys(j.at("limits"), lctx, {"F_max", "v_max"});
    read(j.at("limits"), lctx, "F_max", c.limits.F_max);
    read(j.at("limits"), lctx, "v_max", c.limits.v_max);
  }
  if (j.contains("loop")) {
    const auto lctx = where(ctx, "loop");
    const json& l = j.at("loop");
    allow_keys(l, lctx, {"mode", "Kp", "Ki", "integral_limit"});
    if (l.contains("mode")) {
      const std::string mode = text(l.at("mode"), where(lctx, "mode"));
      if (mode == "pi") {
        c.loop.mode = VelocityLoopMode::ProportionalIntegral;
      } else if (mode == "ideal") {
        c.loop.mode = VelocityLoopMode::IdealTracking;
      } else {
        throw ConfigError("'" + where(lctx, "mode") + "' must be \"pi\" or \"ideal\"");
      }
    }
    read(l, lctx, "Kp", c.loop.Kp);
    read(l, lctx, "Ki", c.loop.Ki);
    read(l, lctx, "integral_limit", c.loop.integral_limit);
  }
  return c;
}

inline void apply_overrides(const json& j, TaskScenario& sc, std::string_view ctx) {
  allow_keys(j, ctx,
             {"M_p", "friction", "initial_velocity", "user", "reference", "force_profile", "goal", "plant"});
  read(j, ctx, "M_p", sc.M_p);
  read(j, ctx, "initial_velocity", sc.initial_velocity);
  if (j.contains("friction")) apply_friction(j.at("friction"), sc.friction, where(ctx, "friction"));
  if (j.contains("plant")) {
    const auto pctx = where(ctx, "plant");
    allow_keys(j.at("plant"), pctx, {"m", "L", "g"});
    read(j.at("plant"), pctx, "m", sc.plant.m);
    read(j.at("plant"), pctx, "L", sc.plant.L);
    read(j.at("plant"), pctx, "g", sc.plant.g);
  }
  if (j.contains("force_profile") && (j.contains("reference") || j.contains("user"))) {
    throw ConfigError("'" + std::string(ctx) + "' mixes force_profile with a tracking reference");
  }
  if (j.contains("force_profile")) {
    sc.input = ForceProfile{knots(j.at("force_profile"), where(ctx, "force_profile"))};
  }
  if (j.contains("reference") || j.contains("user")) {
    TrackingTask task;
    if (const auto* t = std::get_if<TrackingTask>(&sc.input)) task = *t;
    if (j.contains("reference")) task.reference = Reference(knots(j.at("reference"), where(ctx, "reference")));
    if (j.contains("user")) apply_user(j.at("user"), task.user, where(ctx, "user"));
    sc.input = task;
  }
  if (j.contains("goal")) {
    const auto gctx = where(ctx, "goal");
    const json& g = j.at("goal");
    allow_keys(g, gctx, {"kind", "value", "band"});
    if (g.contains("kind")) {
      const std::string kind = text(g.at("kind"), where(gctx, "kind"));
      if (kind == "none") {
        sc.goal.kind = GoalKind::None;
      } else if (kind == "position") {
        sc.goal.kind = GoalKind::Position;
      } else if (kind == "velocity") {
        sc.goal.kind = GoalKind::Velocity;
      } else {
        throw ConfigError("'" + where(gctx, "kind") + "' must be none, position or velocity");
      }
    }
    read(g, gctx, "value", sc.goal.value);
    read(g, gctx, "band", sc.goal.band);
  }
}

inline std::vector<RunSpec> parse_run(const json& j, std::string_view ctx) {
  allow_keys(j, ctx, {"scenario", "controller", "controllers", "overrides", "dt", "duration"});
  if (!j.contains("scenario")) throw ConfigError("'" + std::string(ctx) + "' needs a scenario");
  if (j.contains("controller") && j.contains("controllers")) {
    throw ConfigError("'" + std::string(ctx) + "' takes controller or controllers, not both");
  }
  const std::string scenario = text(j.at("scenario"), where(ctx, "scenario"));

  std::vector<json> controllers;
  if (j.contains("controllers")) {
    if (!j.at("controllers").is_array() || j.at("controllers").empty()) {
      throw ConfigError("'" + where(ctx, "controllers") + "' must be a non-empty array");
    }
    for (const auto& c : j.at("controllers")) controllers.push_back(c);
  } else {
    controllers.push_back(j.value("controller", json("no_assist")));
  }

  std::vector<RunSpec> out;
  for (std::size_t i = 0; i < controllers.size(); ++i) {
    const std::string cctx = j.contains("controllers") ? where(ctx, "controllers[" + std::to_string(i) + "]")
                                                       : where(ctx, "controller");
    RunSpec r;
    r.scenario = scenario_preset(scenario, "no_assist");
    r.scenario.controller = parse_controller(controllers[i], cctx);
    if (j.contains("overrides")) apply_overrides(j.at("overrides"), r.scenario, where(ctx, "overrides"));
    read(j, ctx, "dt", r.scenario.dt);
    read(j, ctx, "duration", r.scenario.duration);
    r.scenario.validate();
    r.echo = j;
    r.echo.erase("controllers");
    r.echo["controller"] = controllers[i];
    out.push_back(std::move(r));
  }
  return out;
}

inline void parse_tune(const json& j, TuneSpec& t, std::string_view ctx) {
  allow_keys(j, ctx, {"parameter", "masses", "b0", "comfort_limit", "tau_min", "tau_max", "tolerance", "scan_points"});
  if (j.contains("parameter") && text(j.at("parameter"), where(ctx, "parameter")) != "tau") {
    throw ConfigError("'" + where(ctx, "parameter") + "' must be \"tau\"");
  }
  if (j.contains("masses")) {
    const json& m = j.at("masses");
    if (!m.is_array() || m.empty()) throw ConfigError("'" + where(ctx, "masses") + "' must be a non-empty array");
    t.masses.clear();
    for (const auto& v : m) t.masses.push_back(number(v, where(ctx, "masses")));
  }
  read(j, ctx, "b0", t.b0);
  if (j.contains("comfort_limit")) {
    const json& c = j.at("comfort_limit");
    if (c.is_string() && c.get<std::string>() == "inf") {
      t.comfort_limit = std::numeric_limits<double>::infinity();
    } else {
      t.comfort_limit = number(c, where(ctx, "comfort_limit"));
    }
  }
  read(j, ctx, "tau_min", t.options.tau_min);
  read(j, ctx, "tau_max", t.options.tau_max);
  read(j, ctx, "tolerance", t.options.tolerance);
  if (j.contains("scan_points")) {
    const json& s = j.at("scan_points");
    if (!s.is_number_integer() || s.get<int>() < 2) {
      throw ConfigError("'" + where(ctx, "scan_points") + "' must be an integer >= 2");
    }
    t.options.scan_points = s.get<int>();
  }
  if (!(t.options.tau_min > 0.0) || !(t.options.tau_max > t.options.tau_min) || !(t.options.tolerance > 0.0)) {
    throw ConfigError("'" + std::string(ctx) + "' needs 0 < tau_min < tau_max and tolerance > 0");
  }
  if (!(t.b0 > 0.0)) throw ConfigError("'" + where(ctx, "b0") + "' must be positive");
  for (double m : t.masses) {
    if (!(m >= 0.0) || m > 272.0) throw ConfigError("tune masses must lie in [0, 272] kg");
  }
}

}  // namespace detail

// Accepts either a "runs" array or a single run's fields at the top level.
inline HarnessConfig parse_config(const json& j) {
  using namespace detail;
  allow_keys(j, "", {"schema_version", "runs", "scenario", "controller", "controllers", "overrides", "dt",
                     "duration", "baseline", "output", "metrics", "tune"});
  if (j.contains("schema_version")) {
    const json& v = j.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
  }
  HarnessConfig cfg;
  if (j.contains("baseline")) cfg.baseline = text(j.at("baseline"), "baseline");
  if (j.contains("output")) {
    allow_keys(j.at("output"), "output", {"series"});
    read(j.at("output"), "output", "series", cfg.series);
  }
  if (j.contains("metrics")) {
    allow_keys(j.at("metrics"), "metrics", {"sensor_emulation"});
    read(j.at("metrics"), "metrics", "sensor_emulation", cfg.metrics.sensor_emulation);
  }
  if (j.contains("tune")) parse_tune(j.at("tune"), cfg.tune, "tune");
  cfg.tune.options.metrics = cfg.metrics;

  const bool single = j.contains("scenario");
  if (single && j.contains("runs")) throw ConfigError("config takes runs or a top-level scenario, not both");
  if (single) {
    json run = json::object();
    for (const char* k : {"scenario", "controller", "controllers", "overrides", "dt", "duration"}) {
      if (j.contains(k)) run[k] = j.at(k);
    }
    cfg.runs = parse_run(run, "");
  } else if (j.contains("runs")) {
    const json& runs = j.at("runs");
    if (!runs.is_array()) throw ConfigError("'runs' must be an array");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto part = parse_run(runs[i], "runs[" + std::to_string(i) + "]");
      for (auto& r : part) cfg.runs.push_back(std::move(r));
    }
  } else {
    for (const char* k : {"controller", "controllers", "overrides", "dt", "duration"}) {
      if (j.contains(k)) throw ConfigError(std::string("'") + k + "' given without a scenario");
    }
  }
  return cfg;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

inline HarnessConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

// Every library scenario under every benchmark controller.
inline HarnessConfig full_compare_config() {
  HarnessConfig cfg;
  for (auto sn : kScenarioNames) {
    for (auto c : kBenchmarkControllers) {
      RunSpec r;
      r.scenario = scenario_preset(sn, c);
      r.echo = {{"scenario", std::string(sn)}, {"controller", std::string(c)}};
      cfg.runs.push_back(std::move(r));
    }
  }
  return cfg;
}

}  // namespace liftassist::harness
