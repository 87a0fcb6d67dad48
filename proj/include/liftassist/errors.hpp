#pragma once

#include <stdexcept>
#include <string>

namespace liftassist {

// Non-finite or out-of-domain plant input.
class InvalidState : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Pendulum left the |theta| < pi/2 region or the state blew up.
class SimulationDiverged : public std::runtime_error {
public:
  explicit SimulationDiverged(const std::string& what, double time = 0.0)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

// Configuration or schema violation.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// No time constant in the search interval meets the comfort limit.
class InfeasibleTuning : public std::runtime_error {
public:
  InfeasibleTuning(const std::string& what, double a_w_at_upper)
      : std::runtime_error(what), a_w_at_upper_(a_w_at_upper) {}
  double a_w_at_upper() const noexcept { return a_w_at_upper_; }

private:
  double a_w_at_upper_;
};

}  // namespace liftassist
