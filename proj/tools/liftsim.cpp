// liftsim: run, compare and tune lift-assistance controllers from JSON configs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "liftassist/harness/config.hpp"
#include "liftassist/harness/report.hpp"
#include "liftassist/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace liftassist;
using namespace liftassist::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Options {
  std::string config;
  std::string out;
  bool series = false;
  int jobs = 1;
  bool seedless_check = false;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

// Writes to --out when given, else to stdout.
void emit(const Options& o, const std::string& file, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / file, content);
}

HarnessConfig config_or(const Options& o, HarnessConfig fallback) {
  HarnessConfig cfg = o.config.empty() ? std::move(fallback) : load_config(o.config);
  cfg.series = cfg.series || o.series;
  return cfg;
}

std::string summary_text(const std::vector<RunResult>& results) {
  std::ostringstream os;
  write_summary_csv(os, results);
  return os.str();
}

std::string comparison_text(const std::vector<RunResult>& results, const std::string& baseline) {
  std::ostringstream os;
  write_comparison_csv(os, compare(results, baseline), baseline);
  return os.str();
}

// Computes the report once sequentially and once on several threads, twice
// each, and demands byte equality.
int determinism_check(const HarnessConfig& cfg, int jobs, const std::function<std::string(const std::vector<RunResult>&)>& render) {
  const int parallel = std::max(2, jobs);
  const std::string a = render(run_all(cfg, 1));
  const std::string b = render(run_all(cfg, 1));
  const std::string c = render(run_all(cfg, parallel));
  if (a == b && a == c) {
    std::cerr << "determinism check: identical output (" << cfg.runs.size() << " runs, jobs 1 and " << parallel
              << ")\n";
    return kExitOk;
  }
  std::cerr << "determinism check: outputs differ\n";
  return kExitFailure;
}

void write_run_outputs(const Options& o, const std::vector<RunResult>& results) {
  if (o.out.empty()) {
    std::cout << summary_text(results);
    return;
  }
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "summary.csv", summary_text(results));
  write_file(fs::path(o.out) / "results.json", results_json(results));
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].series) continue;
    std::ostringstream os;
    write_series_csv(os, *results[i].series);
    write_file(fs::path(o.out) / series_file_name(results[i], i), os.str());
  }
}

int cmd_run(const Options& o) {
  if (o.config.empty()) throw ConfigError("run needs --config");
  const HarnessConfig cfg = config_or(o, {});
  if (cfg.runs.empty()) throw ConfigError("config defines no runs");
  if (o.seedless_check) return determinism_check(cfg, o.jobs, summary_text);
  write_run_outputs(o, run_all(cfg, o.jobs));
  return kExitOk;
}

int cmd_compare(const Options& o) {
  const HarnessConfig cfg = config_or(o, full_compare_config());
  auto render = [&](const std::vector<RunResult>& r) { return comparison_text(r, cfg.baseline); };
  if (o.seedless_check) return determinism_check(cfg, o.jobs, render);
  const auto results = run_all(cfg, o.jobs);
  emit(o, "comparison.csv", render(results));
  if (!o.out.empty()) {
    write_file(fs::path(o.out) / "results.json", results_json(results));
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i].series) continue;
      std::ostringstream os;
      write_series_csv(os, *results[i].series);
      write_file(fs::path(o.out) / series_file_name(results[i], i), os.str());
    }
  }
  return kExitOk;
}

int cmd_tune(const Options& o) {
  const HarnessConfig cfg = config_or(o, {});
  const TuneReport rep = tune(cfg.tune, o.jobs);
  std::ostringstream os;
  write_tune_csv(os, rep);
  emit(o, "tune.csv", os.str());
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  if (rep.all_feasible) {
    std::cerr << "binding tau: " << format_number(rep.binding_tau) << " s"
              << (rep.all_verified ? " (verified at every mass)" : " (verification failed)") << '\n';
  }
  return kExitOk;
}

int cmd_scenarios() {
  std::cout << "scenarios:\n";
  for (auto s : kScenarioNames) std::cout << "  " << s << '\n';
  std::cout << "controllers:\n";
  for (auto c : kControllerNames) std::cout << "  " << c << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o) {
  if (o.config.empty()) throw ConfigError("validate needs --config");
  const HarnessConfig cfg = load_config(o.config);
  std::cout << "ok: " << cfg.runs.size() << " run(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and compare motorised patient-lift assistance controllers"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_runs) {
    sub->add_option("--config", o.config, "JSON configuration file");
    if (!needs_runs) return;
    sub->add_option("--out", o.out, "output directory (stdout when omitted)");
    sub->add_flag("--series", o.series, "also write per-run time series");
    sub->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::Range(1, 256));
    sub->add_flag("--seedless-check", o.seedless_check, "verify that repeated and parallel runs are byte-identical");
  };

  auto* run = app.add_subcommand("run", "run the configured scenarios");
  add_common(run, true);
  auto* cmp = app.add_subcommand("compare", "compare controllers against a baseline (default: full preset)");
  add_common(cmp, true);
  auto* tun = app.add_subcommand("tune", "tune the admittance time constant over patient masses");
  tun->add_option("--config", o.config, "JSON configuration file");
  tun->add_option("--out", o.out, "output directory (stdout when omitted)");
  tun->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::Range(1, 256));
  auto* scn = app.add_subcommand("scenarios", "list scenario and controller presets");
  auto* val = app.add_subcommand("validate", "check a configuration file");
  add_common(val, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(o);
    if (*cmp) return cmd_compare(o);
    if (*tun) return cmd_tune(o);
    if (*scn) return cmd_scenarios();
    if (*val) return cmd_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationDiverged& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
