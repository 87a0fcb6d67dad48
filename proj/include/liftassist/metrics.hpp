#pragma once

// Comfort, effort and manoeuvrability criteria, plus emulation of the
// prototype's 200 Hz IMU and 10 Hz load-cell acquisition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "liftassist/dynamics.hpp"

namespace liftassist {

struct ComfortWeights {
  double kx = 1.4;
  double ky = 1.4;
  double kz = 1.0;
};

inline constexpr double kComfortLimit = 0.315;       // m/s^2, "not uncomfortable"
inline constexpr double kIsoStartForceLimit = 160.0; // N
inline constexpr double kIsoDriveForceLimit = 65.0;  // N
inline constexpr double kMotionThreshold = 0.05;     // m/s
inline constexpr double kOvershootBand = 0.05;       // m

struct TimeSeries {
  double dt = 0.0;
  std::vector<double> samples;
  std::string unit;

  TimeSeries() = default;
  TimeSeries(double dt_, std::vector<double> values, std::string unit_ = {})
      : dt(dt_), samples(std::move(values)), unit(std::move(unit_)) {}

  std::size_t size() const { return samples.size(); }
  double duration() const { return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1); }
  double operator[](std::size_t i) const { return samples[i]; }

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("time series needs dt > 0");
    if (samples.size() < 2) throw std::invalid_argument("time series needs at least 2 samples");
    for (double s : samples) {
      if (!std::isfinite(s)) throw std::invalid_argument("time series holds a non-finite sample");
    }
  }
};

// One simulator sample with the accelerations evaluated at that instant.
struct KinematicSample {
  PlantState state;
  double x_ddot = 0.0;
  double theta_ddot = 0.0;
};

struct PatientAcceleration {
  TimeSeries ax;
  TimeSeries az;
};

// Kinematic acceleration (horizontal, vertical) of the pendulum bob at
// (x + L sin th, -L cos th); gravity excluded. With no patient the cart's own
// acceleration stands in.
inline std::pair<double, double> bob_acceleration(const KinematicSample& k, const PlantParams& p) {
  if (p.M_p == 0.0) return {k.x_ddot, 0.0};
  const double th = k.state.theta;
  const double w = k.state.omega;
  return {k.x_ddot + p.L * (k.theta_ddot * std::cos(th) - w * w * std::sin(th)),
          p.L * (k.theta_ddot * std::sin(th) + w * w * std::cos(th))};
}

inline PatientAcceleration patient_acceleration(std::span<const KinematicSample> traj, double dt,
                                                const PlantParams& p) {
  if (traj.size() < 2) throw std::invalid_argument("patient_acceleration needs at least 2 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("patient_acceleration needs dt > 0");
  std::vector<double> ax(traj.size());
  std::vector<double> az(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::tie(ax[i], az[i]) = bob_acceleration(traj[i], p);
  }
  return {TimeSeries(dt, std::move(ax), "m/s^2"), TimeSeries(dt, std::move(az), "m/s^2")};
}

inline double rms(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double overall_rms_acceleration(const TimeSeries& ax, const TimeSeries& ay, const TimeSeries& az,
                                       const ComfortWeights& w = {}) {
  if (ax.size() != ay.size() || ax.size() != az.size()) {
    throw std::invalid_argument("acceleration series differ in length");
  }
  if (ax.dt != ay.dt || ax.dt != az.dt) {
    throw std::invalid_argument("acceleration series differ in sample period");
  }
  const double rx = w.kx * rms(ax.samples);
  const double ry = w.ky * rms(ay.samples);
  const double rz = w.kz * rms(az.samples);
  return std::sqrt(rx * rx + ry * ry + rz * rz);
}

// Disjoint bands, each row keeping its upper bound.
inline std::string_view comfort_class(double a_w) {
  if (a_w <= 0.315) return "Not uncomfortable";
  if (a_w <= 0.63) return "A little uncomfortable";
  if (a_w <= 0.8) return "Fairly uncomfortable";
  if (a_w <= 1.25) return "Uncomfortable";
  if (a_w <= 2.5) return "Very uncomfortable";
  return "Extremely uncomfortable";
}

// Trapezoidal integral of the squared signal.
inline double integral_of_square(const TimeSeries& s) {
  if (s.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    acc += 0.5 * (s[i - 1] * s[i - 1] + s[i] * s[i]);
  }
  return acc * s.dt;
}

struct EffortIntegrals {
  double int_F2 = 0.0;  // N^2 s
  double int_T2 = 0.0;  // (N m)^2 s
};

inline EffortIntegrals effort_integrals(const TimeSeries& F, const TimeSeries& T) {
  return {integral_of_square(F), integral_of_square(T)};
}

// Sample-and-hold decimation to a lower rate.
inline TimeSeries decimate(const TimeSeries& in, double rate_hz) {
  const double in_rate = 1.0 / in.dt;
  if (in_rate + 1e-9 < rate_hz) {
    throw std::invalid_argument("simulation rate below sensor rate");
  }
  const double out_dt = 1.0 / rate_hz;
  std::vector<double> out;
  const double span = in.dt * static_cast<double>(in.size());
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * out_dt;
    if (t >= span - 1e-12) break;
    auto idx = static_cast<std::size_t>(std::floor(t / in.dt + 1e-9));
    out.push_back(in[std::min(idx, in.size() - 1)]);
  }
  return TimeSeries(out_dt, std::move(out), in.unit);
}

// Trailing moving average; the first window-1 outputs average what is available.
inline TimeSeries moving_average(const TimeSeries& in, std::size_t window) {
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = first; j <= i; ++j) s += in[j];
    out[i] = s / static_cast<double>(i - first + 1);
  }
  return TimeSeries(in.dt, std::move(out), in.unit);
}

struct SensorRates {
  double force_hz = 10.0;
  double imu_hz = 200.0;
  std::size_t imu_window = 50;
};

struct SensorStreams {
  TimeSeries force;
  TimeSeries acceleration;
};

inline SensorStreams emulate_sensors(const TimeSeries& F, const TimeSeries& acc, const SensorRates& r = {}) {
  return {decimate(F, r.force_hz), moving_average(decimate(acc, r.imu_hz), r.imu_window)};
}

// Upward crossings of target + band, each counted once until the signal
// comes back under the threshold.
inline int count_overshoots(const TimeSeries& x, double target, double band = kOvershootBand) {
  if (!(band > 0.0)) throw std::invalid_argument("overshoot band must be positive");
  const double limit = target + band;
  int count = 0;
  bool outside = false;
  for (double s : x.samples) {
    if (!outside && s > limit) {
      ++count;
      outside = true;
    } else if (outside && s <= limit) {
      outside = false;
    }
  }
  return count;
}

struct IsoForceCheck {
  double start_force = 0.0;
  double peak_drive_force = 0.0;
  bool start_pass = true;
  bool drive_pass = true;
};

// Start phase: from the beginning of the run until |v| first reaches the
// motion threshold. Drive phase: everything after.
inline IsoForceCheck start_and_drive_forces(const TimeSeries& F_user, const TimeSeries& v,
                                            double threshold = kMotionThreshold) {
  if (F_user.size() != v.size()) throw std::invalid_argument("force and velocity series misaligned");
  IsoForceCheck r;
  bool moving = false;
  for (std::size_t i = 0; i < F_user.size(); ++i) {
    if (!moving && std::abs(v[i]) >= threshold) moving = true;
    const double f = std::abs(F_user[i]);
    if (moving) {
      r.peak_drive_force = std::max(r.peak_drive_force, f);
    } else {
      r.start_force = std::max(r.start_force, f);
    }
  }
  r.start_pass = r.start_force <= kIsoStartForceLimit;
  r.drive_pass = r.peak_drive_force <= kIsoDriveForceLimit;
  return r;
}

// Earliest time after which pred(i) holds for every remaining sample.
template <typename Pred>
double settling_time(std::size_t n, double dt, Pred&& pred) {
  std::size_t last_bad = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < n; ++i) {
    if (!pred(i)) last_bad = i;
  }
  if (last_bad == std::numeric_limits<std::size_t>::max()) return 0.0;
  if (last_bad + 1 >= n) return dt * static_cast<double>(n - 1);
  return dt * static_cast<double>(last_bad + 1);
}

struct RunMetrics {
  double a_w = 0.0;
  std::string comfort_class;
  double int_F2 = 0.0;
  double int_T2 = 0.0;
  double task_time = 0.0;
  int overshoots = 0;
  double start_force = 0.0;
  double peak_drive_force = 0.0;
  bool iso_start_pass = true;
  bool iso_drive_pass = true;
};

}  // namespace liftassist
