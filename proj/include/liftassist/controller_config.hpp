#pragma once

#include <array>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "liftassist/actuation.hpp"
#include "liftassist/controllers.hpp"
#include "liftassist/errors.hpp"

namespace liftassist {

// Time constant shared by the admittance presets. This is the binding value
// from tuning the comfort step over patient masses {80, 130, 180, 272} kg with
// b0 = 37.5 N s/m; test_tuning re-derives it.
inline constexpr double kDefaultTau = 1.3681;

struct NoAssist {};
struct ForceAmp {
  ForceAmpParams params;
};
struct FrictionComp {
  FrictionCompParams params;
};
struct Admittance {
  AdmittanceParams params = AdmittanceParams::from_tau(kDefaultTau);
};
struct VariableAdmittance {
  VariableAdmittanceParams params = VariableAdmittanceParams::from_tau(kDefaultTau);
};
struct SecondOrder {
  SecondOrderParams params = SecondOrderParams::matched_to(AdmittanceParams::from_tau(kDefaultTau));
};

using ControlLaw = std::variant<NoAssist, ForceAmp, FrictionComp, Admittance, VariableAdmittance, SecondOrder>;

struct ControllerConfig {
  std::string name = "no_assist";
  ControlLaw law = NoAssist{};
  MotorLimits limits;
  VelocityLoopParams loop;

  // True for laws that command a desired velocity through the inner loop.
  bool velocity_commanded() const {
    return std::holds_alternative<Admittance>(law) || std::holds_alternative<VariableAdmittance>(law) ||
           std::holds_alternative<SecondOrder>(law);
  }

  // Whether the motor ever drives the lift (and so the software speed cap applies).
  bool motorised() const { return !std::holds_alternative<NoAssist>(law); }

  void validate() const {
    limits.validate();
    loop.validate();
    std::visit(
        [](const auto& l) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(l)>, NoAssist>) l.params.validate();
        },
        law);
  }
};

inline constexpr std::array<std::string_view, 7> kControllerNames = {
    "no_assist",           "passive_fifth_wheel", "force_amp",   "friction_comp",
    "admittance",          "variable_admittance", "second_order"};

// Controllers compared by the benchmark; friction compensation is left out.
inline constexpr std::array<std::string_view, 5> kBenchmarkControllers = {
    "no_assist", "force_amp", "admittance", "variable_admittance", "second_order"};

// The passive fifth wheel only helps in rotation, which the longitudinal
// model cannot express, so it maps to no motor force.
inline ControllerConfig controller_preset(std::string_view name) {
  ControllerConfig c;
  c.name = std::string(name);
  if (name == "no_assist" || name == "passive_fifth_wheel") {
    c.law = NoAssist{};
  } else if (name == "force_amp") {
    // Matched on the 90 kg / concrete scenario: 30 N held reaches 0.8 m/s.
    c.law = ForceAmp{matched_force_amp(30.0, c.limits.v_max, FrictionParams{50.0, 30.0, 1e-3})};
  } else if (name == "friction_comp") {
    c.law = FrictionComp{};
  } else if (name == "admittance") {
    c.law = Admittance{};
  } else if (name == "variable_admittance") {
    c.law = VariableAdmittance{};
  } else if (name == "second_order") {
    c.law = SecondOrder{};
  } else {
    throw ConfigError("unknown controller '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace liftassist
