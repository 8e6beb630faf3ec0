#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "quadarm/config.hpp"
#include "quadarm/harness.hpp"

namespace {

using namespace quadarm;

int report_audit(const AuditReport& report) {
  if (report.ok()) {
    std::printf("audit: OK (%zu samples)\n", report.samples_checked);
    return 0;
  }
  std::printf("audit: %zu violation(s) in %zu samples\n",
              report.violations.size(), report.samples_checked);
  const std::size_t show = std::min<std::size_t>(report.violations.size(), 10);
  for (std::size_t i = 0; i < show; ++i) {
    std::printf("  %s\n", describe(report.violations[i]).c_str());
  }
  if (show < report.violations.size()) {
    std::printf("  ... %zu more\n", report.violations.size() - show);
  }
  return 1;
}

Scalar column_scale(const std::array<std::vector<Scalar>, kNumJoints>& cols) {
  Scalar scale = 0.0;
  for (const auto& col : cols) {
    for (Scalar v : col) scale = std::max(scale, std::abs(v));
  }
  return scale;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed) {
  const ScenarioConfig cfg = parse_config(config_path);
  RunOptions opts;
  opts.seed = seed;
  const ScenarioLog log = run_scenario(cfg, opts);

  std::filesystem::create_directories(out_dir);
  const std::string csv = out_dir + "/" + log.scenario_name + ".csv";
  write_csv(log, csv);
  std::printf("wrote %s (%zu rows)\n", csv.c_str(), log.rows());
  if (log.rows() > 0) {
    for (const std::string& p : emit_plots(log, out_dir)) {
      std::printf("wrote %s\n", p.c_str());
    }
  }
  if (log.infeasible_events > 0) {
    std::printf("filter fallbacks: %ld\n", log.infeasible_events);
  }
  return report_audit(
      audit_scenario_log(log, cfg.model.limits, AuditTolerances{}));
}

int cmd_audit(const std::string& log_path, const std::string& robot_path) {
  const ScenarioLog log = read_csv(log_path);
  const RobotModel model =
      robot_path.empty() ? default_robot_model() : load_robot_model(robot_path);
  // Logged cells went through %.9e, so the checks get half a decimal ulp
  // of slack per sample. The period only matters once differences exist.
  const AuditTolerances tol = widen_for_quantization(
      AuditTolerances{}, log.T > 0 ? log.T : 1.0, column_scale(log.ref),
      column_scale(log.tau));
  return report_audit(audit_scenario_log(log, model.limits, tol));
}

int cmd_plot(const std::string& log_path, const std::string& out_dir) {
  const ScenarioLog log = read_csv(log_path);
  for (const std::string& p : emit_plots(log, out_dir)) {
    std::printf("wrote %s\n", p.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadarm: wheel-legged robot motion-control toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string log_path;
  std::string robot_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand(
      "run", "simulate a scenario and write its log and plots");
  run->add_option("config", config_path, "scenario configuration file")
      ->required();
  run->add_option("--out", out_dir, "output directory (default .)");
  run->add_option("--seed", seed, "torque-noise stream seed");

  CLI::App* audit = app.add_subcommand(
      "audit", "check a CSV log against the joint envelopes");
  audit->add_option("log", log_path, "CSV log file")->required();
  audit->add_option("--robot", robot_path,
                    "robot description supplying the limit set");

  CLI::App* plot =
      app.add_subcommand("plot", "render validation plots from a CSV log");
  plot->add_option("log", log_path, "CSV log file")->required();
  plot->add_option("--out", out_dir, "output directory (default .)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed);
    if (audit->parsed()) return cmd_audit(log_path, robot_path);
    return cmd_plot(log_path, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
