#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpgt/bounds.hpp"
#include "dpgt/engine.hpp"
#include "dpgt/privacy.hpp"

namespace dpgt {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitHypothesisViolation = 3;

// A fully validated experiment description. Exactly one problem spec, one
// topology spec, and one noise parameterization must be present; the five
// schedule parameters are always explicit. Construction performs full
// validation and resolves nothing else, so a malformed config fails before
// any output file is created.
struct RunConfig {
  nlohmann::json problem;   // {"type":"rendezvous",...} | {"type":"ridge",...}
  nlohmann::json topology;  // {"type":"ring"|"matrix"|"averaging",...}
  Schedule schedule;
  nlohmann::json noise;     // scales | matrix variances | calibrate request
  int horizon = 0;
  int trials = 1;
  std::uint64_t seed = 0;
  bool clip = false;
  std::string output_dir = "out";

  static RunConfig parse(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Config resolved into module objects. When the noise section was a
// calibration request, `budget` echoes the achieved budget.
struct Experiment {
  WeightMatrix wm;
  ObjectiveSet obj;
  Schedule sched;
  NoiseParams noise;
  std::optional<PrivacyReport> budget;
};

Experiment resolve_experiment(const RunConfig& cfg);

// Privacy query assembled from a config (self-weights from the topology,
// C and r from the objectives, scales from the noise section when present).
PrivacyQuery query_from_config(const RunConfig& cfg,
                               std::optional<int> horizon_override = {});

// Least-squares slope of log(err) vs log(m+k) past the burn-in fraction.
struct RateFit {
  double slope = 0;
  double stderr_slope = 0;
  double r_squared = 0;
  int points = 0;
};

// Fits err_k ~ C (m+k)^slope on k in [burn_in*K, K]. Entries that are zero
// or below `floor` are excluded (they sit on the numerical noise floor of a
// geometric phase). Throws InsufficientData when fewer than 10 points
// remain.
RateFit fit_power_law(const std::vector<double>& err, double m,
                      double burn_in_frac, double floor = 0.0);

// Subcommand entry points. Each validates its config, writes its output
// files under cfg.output_dir, prints a human-readable summary to `out`, and
// returns an exit code.
int cmd_run(const nlohmann::json& config, std::ostream& out);
int cmd_budget(const nlohmann::json& config, std::ostream& out);
int cmd_calibrate(const nlohmann::json& config, std::ostream& out);
int cmd_bounds(const nlohmann::json& config, std::ostream& out);
int cmd_sweep(const nlohmann::json& config, std::ostream& out);
int cmd_rate_fit(const std::vector<std::string>& csv_paths,
                 double burn_in_frac, std::optional<double> m_override,
                 std::ostream& out);

// Trajectory CSV schema: k, opt_err, cons_err, track_err, gamma_k, beta_k
// with 17 significant digits.
void write_trajectory_csv(const std::string& path,
                          const std::vector<double>& opt,
                          const std::vector<double>& cons,
                          const std::vector<double>& track,
                          const std::vector<double>& gamma,
                          const std::vector<double>& beta);

struct TrajectoryColumns {
  std::vector<double> k, opt_err, cons_err, track_err, gamma_k, beta_k;
};
TrajectoryColumns read_trajectory_csv(const std::string& path);

// Maps an escaped library error onto an exit code (config errors 2,
// hypothesis violations 3, anything else 1) and prints the message.
int exit_code_for(const Error& e, std::ostream& err);

}  // namespace dpgt
