#pragma once

// Executes configured runs, optionally on several threads. Each run is
// single-threaded and results are merged in (scenario, controller) order,
// so the output does not depend on the job count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "liftassist/harness/config.hpp"
#include "liftassist/harness/report.hpp"
#include "liftassist/simulation.hpp"
#include "liftassist/tuning.hpp"

namespace liftassist::harness {

// Calls task(i) for i in [0, n) on up to `jobs` threads. The first failure
// by index is rethrown once all workers have stopped.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline RunResult run_one(const RunSpec& spec, bool keep_series, const MetricsOptions& metrics = {}) {
  SimulationOutput out = simulate(spec.scenario, metrics);
  RunResult r;
  r.scenario = spec.scenario.name;
  r.controller = spec.scenario.controller.name;
  r.metrics = out.metrics;
  if (keep_series) r.series = std::move(out.series);
  r.config = spec.echo;
  r.assumed = assumed_parameters(spec.scenario);
  return r;
}

inline std::vector<RunResult> run_all(const HarnessConfig& cfg, int jobs = 1) {
  std::vector<RunResult> results(cfg.runs.size());
  parallel_for(cfg.runs.size(), jobs,
               [&](std::size_t i) { results[i] = run_one(cfg.runs[i], cfg.series, cfg.metrics); });
  std::stable_sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    return std::tie(a.scenario, a.controller) < std::tie(b.scenario, b.controller);
  });
  return results;
}

// Pairs every run with the baseline controller's run on the same scenario.
inline std::vector<ComparisonRow> compare(const std::vector<RunResult>& results, const std::string& baseline) {
  std::map<std::string, std::vector<const RunResult*>> by_scenario;
  for (const auto& r : results) by_scenario[r.scenario].push_back(&r);
  bool shared = false;
  for (const auto& [name, runs] : by_scenario) shared = shared || runs.size() >= 2;
  if (!shared) throw ConfigError("compare needs at least two runs sharing a scenario");

  std::vector<ComparisonRow> rows;
  for (const auto& r : results) {
    const auto& group = by_scenario.at(r.scenario);
    auto it = std::find_if(group.begin(), group.end(), [&](const RunResult* g) { return g->controller == baseline; });
    if (it == group.end()) {
      throw ConfigError("baseline controller '" + baseline + "' has no run on scenario '" + r.scenario + "'");
    }
    rows.push_back({&r, *it});
  }
  return rows;
}

struct TuneRow {
  double M_p = 0.0;
  bool feasible = false;
  TuningResult result;
  double a_w_at_upper = 0.0;  // filled when infeasible
  double verify_a_w = std::numeric_limits<double>::quiet_NaN();
  bool verify_pass = false;
};

struct TuneReport {
  std::vector<TuneRow> rows;
  double binding_tau = std::numeric_limits<double>::quiet_NaN();
  bool all_feasible = true;
  bool all_verified = true;
  std::vector<std::string> warnings;
};

// Tunes tau per patient mass, takes the largest as binding, re-runs the
// comfort step at every mass with it, and flags masses where a heavier
// patient needed a smaller tau than a lighter one.
inline TuneReport tune(const TuneSpec& spec, int jobs = 1) {
  const TaskScenario base = scenario_preset("comfort_step", "admittance");
  TuneReport rep;
  rep.rows.resize(spec.masses.size());
  parallel_for(spec.masses.size(), jobs, [&](std::size_t i) {
    TuneRow& row = rep.rows[i];
    row.M_p = spec.masses[i];
    try {
      row.result = tune_time_constant(row.M_p, spec.b0, spec.comfort_limit, base, spec.options);
      row.feasible = true;
    } catch (const InfeasibleTuning& e) {
      row.a_w_at_upper = e.a_w_at_upper();
    }
  });

  for (const auto& row : rep.rows) {
    if (!row.feasible) {
      rep.all_feasible = false;
      rep.warnings.push_back("no feasible tau for M_p=" + format_number(row.M_p) + " kg (a_w at tau_max " +
                             format_number(row.a_w_at_upper) + ")");
    } else if (!row.result.monotone) {
      rep.warnings.push_back("a_w is not monotone in tau for M_p=" + format_number(row.M_p) + " kg");
    }
  }
  if (!rep.all_feasible) {
    rep.all_verified = false;
    return rep;
  }

  rep.binding_tau = 0.0;
  for (const auto& row : rep.rows) rep.binding_tau = std::max(rep.binding_tau, row.result.tau);

  parallel_for(rep.rows.size(), jobs, [&](std::size_t i) {
    TuneRow& row = rep.rows[i];
    row.verify_a_w = comfort_step_a_w(row.M_p, spec.b0, rep.binding_tau, base, spec.options.metrics);
    row.verify_pass = row.verify_a_w <= spec.comfort_limit;
  });
  for (const auto& row : rep.rows) {
    if (!row.verify_pass) {
      rep.all_verified = false;
      rep.warnings.push_back("binding tau fails the comfort limit at M_p=" + format_number(row.M_p) +
                             " kg (a_w " + format_number(row.verify_a_w) + ")");
    }
  }

  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    for (std::size_t j = 0; j < rep.rows.size(); ++j) {
      const auto& lighter = rep.rows[i];
      const auto& heavier = rep.rows[j];
      if (heavier.M_p > lighter.M_p && heavier.result.tau < lighter.result.tau) {
        rep.warnings.push_back("M_p=" + format_number(heavier.M_p) + " kg needs a smaller tau (" +
                               format_number(heavier.result.tau) + " s) than M_p=" + format_number(lighter.M_p) +
                               " kg (" + format_number(lighter.result.tau) + " s)");
      }
    }
  }
  return rep;
}

inline void write_tune_csv(std::ostream& os, const TuneReport& rep) {
  os << "M_p,status,tau,a_w,a_w_below,monotone_scan,simulations,binding_tau,verify_a_w,verify_pass\n";
  for (const auto& row : rep.rows) {
    const bool f = row.feasible;
    write_row(os, {format_number(row.M_p), f ? "ok" : "infeasible", f ? format_number(row.result.tau) : "",
                   f ? format_number(row.result.a_w) : format_number(row.a_w_at_upper),
                   f ? format_number(row.result.a_w_below) : "", f && row.result.monotone ? "true" : "false",
                   f ? std::to_string(row.result.simulations) : "", format_number(rep.binding_tau),
                   format_number(row.verify_a_w), row.verify_pass ? "true" : "false"});
  }
}

}  // namespace liftassist::harness
