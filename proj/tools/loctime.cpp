#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "loctime/acceptance.hpp"
#include "loctime/calibration.hpp"
#include "loctime/config.hpp"
#include "loctime/errors.hpp"
#include "loctime/harness.hpp"
#include "loctime/report.hpp"

namespace fs = std::filesystem;
using namespace loctime;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("LOCTIME_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::size_t used = 0;
  const std::string s(v);
  const auto seed = std::stoull(s, &used, 0);
  if (used != s.size()) throw ConfigError("LOCTIME_SEED: not an integer: '" + s + "'");
  return seed;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_report(const fs::path& dir, const std::string& stem,
                  const ExperimentReport& report) {
  fs::create_directories(dir);
  write_file(dir / (stem + ".json"), report_to_json(report) + "\n");
  write_file(dir / (stem + ".csv"), report_to_csv(report));
}

void print_checks(const ExperimentReport& r, std::ostream& out) {
  out << "kind " << to_string(r.config.kind) << ", " << r.config.n_paths
      << " paths, seed " << r.config.base_seed << ", " << std::fixed
      << std::setprecision(1) << r.wall_time << " s"
      << (r.degraded ? ", DEGRADED" : "") << "\n";
  out << std::defaultfloat << std::setprecision(5);
  for (const auto& c : r.checks) {
    out << "  " << (c.pass ? "pass" : "FAIL") << (c.gating ? "  " : "* ")
        << std::left << std::setw(42) << c.name << std::right;
    if (c.h > 0) out << " h=" << std::setw(7) << c.h;
    else out << "          ";
    out << " est=" << std::setw(12) << c.estimate << " oracle=" << std::setw(12)
        << c.oracle;
    if (c.z != 0.0) out << " z=" << std::setw(8) << c.z;
    out << "  [" << c.anchor << "]\n";
  }
  out << "  (* = reported only)\n" << r.tolerance_note << "\n";
}

int cmd_run(const std::string& config_path, const std::string& output_dir,
            const std::vector<std::string>& overrides,
            std::optional<unsigned> threads) {
  ExperimentConfig config;
  try {
    IniTable table = parse_ini_file(config_path);
    apply_overrides(table, overrides);
    if (const auto seed = seed_from_env()) {
      table["experiment.base_seed"] = std::to_string(*seed);
    }
    if (threads) table["experiment.threads"] = std::to_string(*threads);
    config = config_from_table(table);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto report = run_experiment(config);
  print_checks(report, std::cout);
  const std::string stem = fs::path(config_path).stem().string();
  write_report(output_dir, stem, report);
  std::cout << "wrote " << (fs::path(output_dir) / (stem + ".json")).string()
            << " and .csv\n";
  return report.passed() ? kExitPass : kExitFail;
}

int cmd_verify_all(bool quick, const std::string& output_dir,
                   std::optional<unsigned> threads) {
  AcceptanceOptions options;
  options.quick = quick;
  options.threads = threads.value_or(0);
  options.seed = seed_from_env();
  options.progress = [](const std::string& msg) { std::cerr << "[verify-all] " << msg << "\n"; };
  const auto run = run_acceptance(options);
  std::cout << "acceptance suite (" << (quick ? "quick" : "full") << " mode)\n";
  for (const auto& o : run.criteria) std::cout << format_outcome(o) << "\n";
  if (!output_dir.empty()) {
    for (std::size_t i = 0; i < run.configs.size(); ++i) {
      if (run.reports[i].checks.empty()) continue;
      write_report(output_dir, run.configs[i].name, run.reports[i]);
    }
  }
  const bool ok = run.passed();
  std::cout << (ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return ok ? kExitPass : kExitFail;
}

int cmd_calibrate(const std::string& path, bool force) {
  if (fs::exists(path) && !force) {
    std::cout << "calibration file '" << path
              << "' exists; nothing to do (use --force to refit)\n";
    return kExitPass;
  }
  const auto cal = fit_calibration();
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  write_file(path, render_calibration(cal));
  std::cout << render_calibration(cal);
  for (const auto& [key, value] : cal.constants) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      std::cerr << "non-positive or non-finite constant " << key << "\n";
      return kExitFail;
    }
  }
  return kExitPass;
}

int cmd_report(const std::string& path, bool csv) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open report '" << path << "'\n";
    return kExitUsage;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentReport report;
  try {
    report = report_from_json(buf.str());
  } catch (const std::exception& e) {
    std::cerr << "invalid report: " << e.what() << "\n";
    return kExitUsage;
  }
  if (csv) std::cout << report_to_csv(report);
  else print_checks(report, std::cout);
  return report.passed() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local time increment CLT verification harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir = "reports";
  std::vector<std::string> overrides;
  std::optional<unsigned> threads;
  bool quick = false;
  bool force = false;
  bool csv = false;
  std::string calibration_path = "calibration/constants.cfg";
  std::string report_path;

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "Experiment config (INI)")->required();
  run->add_option("--output-dir", output_dir, "Directory for JSON and CSV reports");
  run->add_option("--override", overrides, "key=value override (repeatable)");
  run->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* verify = app.add_subcommand("verify-all", "Run the acceptance suite");
  verify->add_flag("--quick", quick, "Reduced sizes and looser gates");
  verify->add_option("--output-dir", output_dir, "Directory for per-experiment reports");
  verify->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* calibrate = app.add_subcommand("calibrate", "Fit and freeze bound constants");
  calibrate->add_option("--output", calibration_path, "Calibration file");
  calibrate->add_flag("--force", force, "Refit even if the file exists");

  auto* report = app.add_subcommand("report", "Summarize a JSON report");
  report->add_option("report", report_path, "Report JSON file")->required();
  report->add_flag("--csv", csv, "Print the CSV rendering instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, output_dir, overrides, threads);
    if (*verify) {
      const bool dir_given = verify->count("--output-dir") > 0;
      return cmd_verify_all(quick, dir_given ? output_dir : "", threads);
    }
    if (*calibrate) return cmd_calibrate(calibration_path, force);
    if (*report) return cmd_report(report_path, csv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
