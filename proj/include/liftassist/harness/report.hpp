#pragma once

// CSV and JSON serialization. Numbers are written with 9 significant digits
// through std::to_chars, so output never depends on the process locale.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "liftassist/harness/config.hpp"
#include "liftassist/metrics.hpp"
#include "liftassist/simulation.hpp"

#ifndef LIFTASSIST_VERSION
#define LIFTASSIST_VERSION "unknown"
#endif

namespace liftassist::harness {

inline constexpr std::string_view kToolVersion = LIFTASSIST_VERSION;

struct RunResult {
  std::string scenario;
  std::string controller;
  RunMetrics metrics;
  std::optional<SeriesBundle> series;
  json config;
  json assumed;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
  return std::string(buf.data(), res.ptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline constexpr std::array<std::string_view, 12> kSummaryColumns = {
    "scenario",    "controller", "a_w",         "comfort_class",    "int_F2",         "int_T2",
    "task_time",   "overshoots", "start_force", "peak_drive_force", "iso_start_pass", "iso_drive_pass"};

// Metric columns that get a percentage delta in comparison tables.
inline constexpr std::array<std::string_view, 7> kDeltaColumns = {
    "a_w", "int_F2", "int_T2", "task_time", "overshoots", "start_force", "peak_drive_force"};

inline double metric_value(const RunMetrics& m, std::string_view column) {
  if (column == "a_w") return m.a_w;
  if (column == "int_F2") return m.int_F2;
  if (column == "int_T2") return m.int_T2;
  if (column == "task_time") return m.task_time;
  if (column == "overshoots") return static_cast<double>(m.overshoots);
  if (column == "start_force") return m.start_force;
  if (column == "peak_drive_force") return m.peak_drive_force;
  throw std::invalid_argument("no numeric metric '" + std::string(column) + "'");
}

inline std::vector<std::string> summary_row(const RunResult& r) {
  const RunMetrics& m = r.metrics;
  return {csv_field(r.scenario),
          csv_field(r.controller),
          format_number(m.a_w),
          csv_field(m.comfort_class),
          format_number(m.int_F2),
          format_number(m.int_T2),
          format_number(m.task_time),
          std::to_string(m.overshoots),
          format_number(m.start_force),
          format_number(m.peak_drive_force),
          m.iso_start_pass ? "true" : "false",
          m.iso_drive_pass ? "true" : "false"};
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

inline void write_summary_csv(std::ostream& os, const std::vector<RunResult>& results) {
  write_row(os, std::vector<std::string>(kSummaryColumns.begin(), kSummaryColumns.end()));
  for (const auto& r : results) write_row(os, summary_row(r));
}

inline void write_series_csv(std::ostream& os, const SeriesBundle& s) {
  os << "t,x,v,theta,omega,F_user,F_motor,v_d,ax,az\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    write_row(os, {format_number(s.t[i]), format_number(s.x[i]), format_number(s.v[i]), format_number(s.theta[i]),
                   format_number(s.omega[i]), format_number(s.F_user[i]), format_number(s.F_motor[i]),
                   format_number(s.v_d[i]), format_number(s.ax[i]), format_number(s.az[i])});
  }
}

// Percentage change against the baseline; empty when the baseline is zero
// and the value is not.
inline std::string percent_delta(double value, double baseline) {
  if (baseline == 0.0) return value == 0.0 ? "0" : "";
  return format_number(100.0 * (value - baseline) / std::abs(baseline));
}

struct ComparisonRow {
  const RunResult* run = nullptr;
  const RunResult* baseline = nullptr;
};

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows,
                                 std::string_view baseline_name) {
  std::vector<std::string> header(kSummaryColumns.begin(), kSummaryColumns.end());
  header.emplace_back("baseline");
  for (auto c : kDeltaColumns) header.push_back("delta_" + std::string(c) + "_pct");
  write_row(os, header);
  for (const auto& row : rows) {
    auto cells = summary_row(*row.run);
    cells.push_back(csv_field(baseline_name));
    for (auto c : kDeltaColumns) {
      cells.push_back(percent_delta(metric_value(row.run->metrics, c), metric_value(row.baseline->metrics, c)));
    }
    write_row(os, cells);
  }
}

inline json metrics_json(const RunMetrics& m) {
  return {{"a_w", m.a_w},
          {"comfort_class", m.comfort_class},
          {"int_F2", m.int_F2},
          {"int_T2", m.int_T2},
          {"task_time", m.task_time},
          {"overshoots", m.overshoots},
          {"start_force", m.start_force},
          {"peak_drive_force", m.peak_drive_force},
          {"iso_start_pass", m.iso_start_pass},
          {"iso_drive_pass", m.iso_drive_pass}};
}

// User-model constants are invented for the simulation and are labelled so.
inline json assumed_parameters(const TaskScenario& sc) {
  json out = json::object();
  if (const auto* t = std::get_if<TrackingTask>(&sc.input)) {
    out["user_model"] = {{"Kp_u", t->user.Kp_u},
                         {"Kx_u", t->user.Kx_u},
                         {"F_user_max", t->user.F_user_max},
                         {"reaction_delay", t->user.reaction_delay},
                         {"release_time", t->user.release_time}};
  }
  return out;
}

inline std::string results_json(const std::vector<RunResult>& results) {
  json runs = json::array();
  for (const auto& r : results) {
    runs.push_back({{"scenario", r.scenario},
                    {"controller", r.controller},
                    {"metrics", metrics_json(r.metrics)},
                    {"config", r.config},
                    {"assumed_parameters", r.assumed}});
  }
  json doc = {{"tool", "liftsim"}, {"version", std::string(kToolVersion)}, {"runs", runs}};
  return doc.dump(2) + "\n";
}

inline std::string series_file_name(const RunResult& r, std::size_t index) {
  std::ostringstream os;
  os << "series_" << index << "_" << r.scenario << "_" << r.controller << ".csv";
  return os.str();
}

}  // namespace liftassist::harness
