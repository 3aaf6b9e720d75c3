#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

namespace {

using namespace freebnd;
using namespace freebnd::cli;

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

int cmd_validate(const std::string& path) {
  try {
    const ExperimentConfig cfg = load_config(path);
    validate_config(cfg);
    std::cout << path << ": valid " << to_string(cfg.kind) << " config\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_run(const std::string& path, const std::string& out, bool quiet) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path, out);
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunReport report;
  report.config = cfg.raw;
  report.kind = to_string(cfg.kind);
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    run_experiment(cfg, report);
    code = report.any_violated() ? kExitViolated : kExitOk;
    report.status = code == kExitOk ? "ok" : "violated";
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    report.status = "compute_failure";
    report.error = std::string(to_string(e.code())) + ": " + e.what();
    code = kExitCompute;
  } catch (const std::exception& e) {
    report.status = "compute_failure";
    report.error = e.what();
    code = kExitCompute;
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_report(cfg.output_dir, report);
  } catch (const Error& e) {
    std::cerr << "cannot write report: " << e.what() << "\n";
    return kExitCompute;
  }
  if (!quiet) std::cout << render_report(report.to_json());
  if (code == kExitCompute) std::cerr << "compute failure: " << report.error << "\n";
  return code;
}

int cmd_report(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "report.json");
  if (!in) {
    std::cerr << "no report.json in '" << dir << "'\n";
    return kExitConfig;
  }
  try {
    const auto j = nlohmann::json::parse(in);
    std::cout << render_report(j);
    const auto s = j.value("status", std::string("ok"));
    return s == "ok" ? kExitOk : s == "violated" ? kExitViolated : kExitCompute;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed report: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for nonlocal obstacle problems and boundary regularity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config, out, dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("-o,--out", out, "Output directory (overrides the config and FREEBND_OUTPUT_DIR)");
  run->add_flag("-q,--quiet", quiet, "Do not print the report");
  auto* validate = app.add_subcommand("validate", "Parse and validate a config without computing");
  validate->add_option("config", config, "Experiment config (JSON)")->required();
  auto* report = app.add_subcommand("report", "Pretty-print the report of a finished run");
  report->add_option("run_dir", dir, "Directory containing report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  if (*run) return cmd_run(config, out, quiet);
  if (*validate) return cmd_validate(config);
  return cmd_report(dir);
}
