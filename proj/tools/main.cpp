#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpgt/harness.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw dpgt::ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw dpgt::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

// CLI overrides layered onto the config file, so common sweeps don't need
// one file per point.
void apply_overrides(nlohmann::json& cfg, const std::optional<double>& ring_r,
                     const std::optional<double>& ring_d,
                     const std::optional<int>& horizon,
                     const std::optional<int>& trials,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& output_dir) {
  nlohmann::json& base =
      cfg.contains("config") && cfg.at("config").is_object() ? cfg["config"] : cfg;
  if (ring_r) base["topology"] = {{"type", "ring"}, {"r", *ring_r},
                                  {"d", base["topology"].value("d", 0.5)}};
  if (ring_r && ring_d) base["topology"]["d"] = *ring_d;
  if (!ring_r && ring_d) base["topology"]["d"] = *ring_d;
  if (horizon) base["horizon"] = *horizon;
  if (trials) base["trials"] = *trials;
  if (seed) base["seed"] = *seed;
  if (output_dir) base["output_dir"] = *output_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpgt: differentially private gradient-tracking distributed "
      "optimization - simulator, privacy accounting, and error bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> ring_r, ring_d;
  std::optional<int> horizon, trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* opt = sub->add_option("-c,--config", config_path,
                                "JSON config file (or a meta.json to replay)");
    if (needs_config) opt->required();
    sub->add_option("--ring-r", ring_r, "override topology with ring(r, d)");
    sub->add_option("--ring-d", ring_d, "ring split parameter d");
    sub->add_option("--horizon", horizon, "override horizon K");
    sub->add_option("--trials", trials, "override Monte Carlo trial count");
    sub->add_option("--seed", seed, "override master seed");
    sub->add_option("--output-dir", output_dir, "override output directory");
  };

  auto* run = app.add_subcommand("run", "simulate and write trajectories");
  add_common(run);
  auto* budget = app.add_subcommand("budget", "print/write the privacy budget");
  add_common(budget);
  std::optional<double> cal_eps;
  std::optional<std::string> cal_horizon;
  auto* calibrate =
      app.add_subcommand("calibrate", "solve Laplace scales for a target eps");
  add_common(calibrate);
  calibrate->add_option("--eps", cal_eps, "target privacy budget");
  calibrate->add_option("--K", cal_horizon,
                        "calibration horizon (integer or 'infinite')");
  auto* bounds =
      app.add_subcommand("bounds", "stepsize bounds and steady-state errors");
  add_common(bounds);
  auto* sweep = app.add_subcommand("sweep", "steady-state error over a grid");
  add_common(sweep);

  auto* rate_fit =
      app.add_subcommand("rate-fit", "fit decay exponents from trajectory CSVs");
  std::vector<std::string> csv_paths;
  double burn_in = 0.2;
  std::optional<double> m_override;
  rate_fit->add_option("files", csv_paths, "trajectory CSV files")->required();
  rate_fit->add_option("--burn-in", burn_in,
                       "fraction of iterations to discard (default 0.2)");
  rate_fit->add_option("--m", m_override,
                       "schedule offset m (default: sibling meta.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rate_fit->parsed())
      return dpgt::cmd_rate_fit(csv_paths, burn_in, m_override, std::cout);

    nlohmann::json cfg = load_config(config_path);
    apply_overrides(cfg, ring_r, ring_d, horizon, trials, seed, output_dir);
    if (calibrate->parsed() && (cal_eps || cal_horizon)) {
      nlohmann::json& base = cfg.contains("config") ? cfg["config"] : cfg;
      nlohmann::json cal =
          base["noise"].contains("calibrate") ? base["noise"]["calibrate"]
                                              : nlohmann::json::object();
      if (cal_eps) cal["eps"] = *cal_eps;
      if (cal_horizon) {
        if (*cal_horizon == "infinite")
          cal["horizon"] = "infinite";
        else
          cal["horizon"] = std::stoi(*cal_horizon);
      }
      base["noise"] = {{"calibrate", cal}};
    }

    if (run->parsed()) return dpgt::cmd_run(cfg, std::cout);
    if (budget->parsed()) return dpgt::cmd_budget(cfg, std::cout);
    if (calibrate->parsed()) return dpgt::cmd_calibrate(cfg, std::cout);
    if (bounds->parsed()) return dpgt::cmd_bounds(cfg, std::cout);
    if (sweep->parsed()) return dpgt::cmd_sweep(cfg, std::cout);
  } catch (const dpgt::Error& e) {
    return dpgt::exit_code_for(e, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
