#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "feddro/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, std::int64_t seed_override,
            const std::string& out_override) {
  feddro::RunConfig cfg = feddro::load_run_config(config_path);
  if (seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.raw["seed"] = cfg.seed;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  const feddro::RunOutcome outcome = feddro::run_experiment(cfg);
  std::cout << outcome.meta.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
              const std::string& out_dir) {
  const feddro::RunConfig base = feddro::load_run_config(config_path);
  const std::string out = out_dir.empty() ? (base.out_dir.empty() ? "sweep" : base.out_dir)
                                          : out_dir;
  const feddro::SweepResult sr = feddro::sweep(base, axis, values, seeds, out);
  std::cout << "wrote " << sr.summary_path << " (" << sr.cell_dirs.size() << " cells)\n";
  return 0;
}

int cmd_verify(const std::string& out_path) {
  const feddro::VerifyReport report = feddro::verify_suite();
  const nlohmann::json j = feddro::verify_report_json(report);
  std::cout << j.dump(2) << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << j.dump(2) << "\n";
  }
  return report.all_pass() ? 0 : 3;
}

int cmd_report(const std::string& dir) {
  std::cout << "wrote " << feddro::regenerate_summary(dir) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated compositional optimization simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, report_dir, verify_out;
  std::int64_t seed_override = -1;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds{0};

  auto* run = app.add_subcommand("run", "Execute one configured experiment");
  run->add_option("--config", config_path, "Config file (JSON)")->required();
  run->add_option("--seed", seed_override, "Override the config's master seed");
  run->add_option("--out", out_dir, "Override the output directory");

  auto* sw = app.add_subcommand("sweep", "Run a grid over one hyperparameter axis");
  sw->add_option("--config", config_path, "Base config file (JSON)")->required();
  sw->add_option("--axis", axis, "Axis: K, I, eta, or T")->required();
  sw->add_option("--values", values, "Axis values")->required()->delimiter(',');
  sw->add_option("--seeds", seeds, "Master seeds")->delimiter(',');
  sw->add_option("--out", out_dir, "Sweep output directory");

  auto* ver = app.add_subcommand("verify", "Run the oracle verification suite");
  ver->add_option("--out", verify_out, "Also write the JSON report to this file");

  auto* rep = app.add_subcommand("report", "Regenerate summary.csv for a sweep directory");
  rep->add_option("--dir", report_dir, "Sweep directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed_override, out_dir);
    if (*sw) return cmd_sweep(config_path, axis, values, seeds, out_dir);
    if (*ver) return cmd_verify(verify_out);
    if (*rep) return cmd_report(report_dir);
  } catch (const feddro::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
