#include "dpgt/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dpgt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("config." + field + ": " + why);
}

double require_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j.at(field).is_number())
    config_fail(field, "required numeric field is missing");
  return j.at(field).get<double>();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::parse(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig cfg;

  if (!j.contains("problem") || !j.at("problem").is_object())
    config_fail("problem", "exactly one problem spec required");
  cfg.problem = j.at("problem");
  const std::string ptype = cfg.problem.value("type", "");
  if (ptype != "rendezvous" && ptype != "ridge")
    config_fail("problem.type", "must be 'rendezvous' or 'ridge'");

  if (!j.contains("topology") || !j.at("topology").is_object())
    config_fail("topology", "exactly one topology spec required");
  cfg.topology = j.at("topology");
  const std::string ttype = cfg.topology.value("type", "");
  if (ttype != "ring" && ttype != "matrix" && ttype != "averaging")
    config_fail("topology.type", "must be 'ring', 'matrix', or 'averaging'");

  if (!j.contains("schedule") || !j.at("schedule").is_object())
    config_fail("schedule", "required section missing");
  const json& s = j.at("schedule");
  // No hidden defaults: all five schedule parameters must be explicit.
  cfg.schedule.alpha = require_number(s, "alpha");
  cfg.schedule.gamma = require_number(s, "gamma");
  cfg.schedule.p = require_number(s, "p");
  cfg.schedule.q = require_number(s, "q");
  cfg.schedule.m = require_number(s, "m");
  try {
    cfg.schedule.check();
  } catch (const OutOfRange& e) {
    config_fail("schedule", e.what());
  }

  if (!j.contains("noise") || !j.at("noise").is_object())
    config_fail("noise", "required section missing");
  cfg.noise = j.at("noise");
  const bool has_scales = cfg.noise.contains("b_eta") || cfg.noise.contains("b_xi");
  const bool has_sigma =
      cfg.noise.contains("sigma_eta_sq") || cfg.noise.contains("sigma_xi_sq");
  const bool has_cal = cfg.noise.contains("calibrate");
  if (has_scales + has_sigma + has_cal != 1)
    config_fail("noise",
                "exactly one parameterization required: Laplace scales "
                "{b_eta,b_xi}, matrix variances {sigma_eta_sq,sigma_xi_sq}, "
                "or a {calibrate:{eps,horizon[,split]}} request");
  if (has_scales && !(cfg.noise.contains("b_eta") && cfg.noise.contains("b_xi")))
    config_fail("noise", "both b_eta and b_xi are required");
  if (has_sigma && !(cfg.noise.contains("sigma_eta_sq") &&
                     cfg.noise.contains("sigma_xi_sq")))
    config_fail("noise", "both sigma_eta_sq and sigma_xi_sq are required");

  if (!j.contains("horizon") || !j.at("horizon").is_number_integer())
    config_fail("horizon", "required integer field missing");
  cfg.horizon = j.at("horizon").get<int>();
  if (cfg.horizon < 1) config_fail("horizon", "must be >= 1");

  if (!j.contains("seed") || !j.at("seed").is_number_integer())
    config_fail("seed", "required integer field missing (runs must be replayable)");
  cfg.seed = j.at("seed").get<std::uint64_t>();

  cfg.trials = j.value("trials", 1);
  if (cfg.trials < 1) config_fail("trials", "must be >= 1");
  cfg.clip = j.value("clip", false);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  return cfg;
}

json RunConfig::to_json() const {
  return json{{"problem", problem},
              {"topology", topology},
              {"schedule",
               {{"alpha", schedule.alpha},
                {"gamma", schedule.gamma},
                {"p", schedule.p},
                {"q", schedule.q},
                {"m", schedule.m}}},
              {"noise", noise},
              {"horizon", horizon},
              {"trials", trials},
              {"seed", seed},
              {"clip", clip},
              {"output_dir", output_dir}};
}

namespace {

WeightMatrix topology_from_config(const json& t) {
  const std::string type = t.at("type").get<std::string>();
  try {
    if (type == "ring")
      return make_ring_weights(t.at("r").get<double>(), t.at("d").get<double>());
    if (type == "averaging") return make_averaging_weights(t.at("n").get<int>());
    const auto rows = t.at("w").get<std::vector<std::vector<double>>>();
    const int n = static_cast<int>(rows.size());
    Matrix w(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n)
        throw ConfigError("config.topology.w: ragged matrix");
      for (int j2 = 0; j2 < n; ++j2) w(i, j2) = rows[i][j2];
    }
    return WeightMatrix::validate(w);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config.topology: ") + e.what());
  }
}

ObjectiveSet objective_from_config(const json& p) {
  try {
    return ObjectiveSet::from_json(p);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config.problem: ") + e.what());
  }
}

// Horizon entries accept an integer or the string "infinite".
std::optional<int> parse_horizon_field(const json& j, const std::string& name) {
  if (!j.contains(name)) return std::nullopt;
  if (j.at(name).is_string() && j.at(name).get<std::string>() == "infinite")
    return std::nullopt;
  if (j.at(name).is_number_integer()) return j.at(name).get<int>();
  throw ConfigError("config." + name + ": integer or \"infinite\" expected");
}

}  // namespace

PrivacyQuery query_from_config(const RunConfig& cfg,
                               std::optional<int> horizon_override) {
  const WeightMatrix wm = topology_from_config(cfg.topology);
  const ObjectiveSet obj = objective_from_config(cfg.problem);
  PrivacyQuery q;
  q.horizon = horizon_override ? horizon_override
                               : std::optional<int>(cfg.horizon);
  q.schedule = cfg.schedule;
  q.c_grad = obj.c_bound;
  q.dim = obj.r;
  q.w_diag = wm.diagonal();
  if (cfg.noise.contains("b_eta")) {
    q.b_eta = cfg.noise.at("b_eta").get<double>();
    q.b_xi = cfg.noise.at("b_xi").get<double>();
  } else if (cfg.noise.contains("sigma_eta_sq")) {
    const NoiseParams np = NoiseParams::from_matrix_variance(
        cfg.noise.at("sigma_eta_sq").get<double>(),
        cfg.noise.at("sigma_xi_sq").get<double>(), obj.n, obj.r);
    q.b_eta = np.b_eta;
    q.b_xi = np.b_xi;
  }
  return q;
}

Experiment resolve_experiment(const RunConfig& cfg) {
  WeightMatrix wm = topology_from_config(cfg.topology);
  ObjectiveSet obj = objective_from_config(cfg.problem);
  if (wm.n() != obj.n)
    throw ConfigError("config: topology and problem disagree on agent count");

  std::optional<PrivacyReport> budget;
  NoiseParams noise{};
  if (cfg.noise.contains("b_eta")) {
    noise = NoiseParams::from_scales(cfg.noise.at("b_eta").get<double>(),
                                     cfg.noise.at("b_xi").get<double>());
  } else if (cfg.noise.contains("sigma_eta_sq")) {
    noise = NoiseParams::from_matrix_variance(
        cfg.noise.at("sigma_eta_sq").get<double>(),
        cfg.noise.at("sigma_xi_sq").get<double>(), obj.n, obj.r);
  } else {
    const json& cal = cfg.noise.at("calibrate");
    if (!cal.contains("eps")) throw ConfigError("config.noise.calibrate.eps: missing");
    const double eps = cal.at("eps").get<double>();
    const double split = cal.value("split", 0.5);
    PrivacyQuery q = query_from_config(cfg);  // horizon defaults to cfg.horizon
    if (cal.contains("horizon")) q.horizon = parse_horizon_field(cal, "horizon");
    const auto [b_eta, b_xi] = calibrate_noise(eps, split, q);
    noise = NoiseParams::from_scales(b_eta, b_xi);
    q.b_eta = b_eta;
    q.b_xi = b_xi;
    budget = q.horizon ? finite_horizon_budget(q) : infinite_horizon_budget(q);
  }
  return Experiment{std::move(wm), std::move(obj), cfg.schedule, noise,
                    std::move(budget)};
}

RateFit fit_power_law(const std::vector<double>& err, double m,
                      double burn_in_frac, double floor) {
  if (burn_in_frac < 0 || burn_in_frac >= 1)
    throw OutOfRange("rate fit: burn-in fraction must lie in [0, 1)");
  const int n = static_cast<int>(err.size());
  const int k0 = static_cast<int>(std::ceil(burn_in_frac * (n - 1)));
  std::vector<double> xs, ys;
  for (int k = k0; k < n; ++k) {
    if (err[k] > floor) {
      xs.push_back(std::log(m + k));
      ys.push_back(std::log(err[k]));
    }
  }
  const int pts = static_cast<int>(xs.size());
  if (pts < 10)
    throw InsufficientData("rate fit: fewer than 10 usable points after burn-in");

  double sx = 0, sy = 0;
  for (int i = 0; i < pts; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / pts, my = sy / pts;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < pts; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.points = pts;
  fit.slope = sxy / sxx;
  double rss = 0;
  for (int i = 0; i < pts; ++i) {
    const double resid = ys[i] - my - fit.slope * (xs[i] - mx);
    rss += resid * resid;
  }
  fit.stderr_slope = pts > 2 ? std::sqrt(rss / (pts - 2) / sxx) : 0.0;
  fit.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
  return fit;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<double>& opt,
                          const std::vector<double>& cons,
                          const std::vector<double>& track,
                          const std::vector<double>& gamma,
                          const std::vector<double>& beta) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << "k,opt_err,cons_err,track_err,gamma_k,beta_k\n";
  for (std::size_t k = 0; k < opt.size(); ++k) {
    f << k << ',' << fmt17(opt[k]) << ',' << fmt17(cons[k]) << ','
      << fmt17(track[k]) << ',' << fmt17(gamma[k]) << ',' << fmt17(beta[k])
      << '\n';
  }
}

TrajectoryColumns read_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  TrajectoryColumns cols;
  std::string line;
  if (!std::getline(f, line)) throw InsufficientData("empty trajectory file");
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != 6) throw Error(path + ": expected 6 columns");
    cols.k.push_back(row[0]);
    cols.opt_err.push_back(row[1]);
    cols.cons_err.push_back(row[2]);
    cols.track_err.push_back(row[3]);
    cols.gamma_k.push_back(row[4]);
    cols.beta_k.push_back(row[5]);
  }
  return cols;
}

namespace {

json budget_to_json(const PrivacyReport& rep) {
  json agents = json::array();
  for (int i = 0; i < rep.eps_per_agent.size(); ++i)
    agents.push_back({{"agent", i},
                      {"eps", rep.eps_per_agent(i)},
                      {"s_channel", rep.s_channel(i)},
                      {"x_channel", rep.x_channel(i)}});
  return json{{"eps", rep.eps},
              {"worst_agent", rep.worst_agent},
              {"per_agent", agents},
              {"infinite_horizon", rep.infinite_horizon},
              {"tail_start_ceiled", rep.tail_start_ceiled}};
}

// Config may be a bare config or a previously written meta.json; the latter
// replays the run it recorded.
const json& unwrap_config(const json& j) {
  if (j.is_object() && j.contains("config") && j.at("config").is_object())
    return j.at("config");
  return j;
}

}  // namespace

int cmd_run(const json& config, std::ostream& out) {
  const auto t_start = std::chrono::steady_clock::now();
  const RunConfig cfg = RunConfig::parse(unwrap_config(config));
  const Experiment ex = resolve_experiment(cfg);

  RunOptions opts;
  opts.horizon = cfg.horizon;
  opts.seed = cfg.seed;
  opts.clip = cfg.clip;
  const MonteCarloResult mc = monte_carlo(ex.wm, ex.obj, ex.sched, ex.noise,
                                          opts, cfg.trials);

  fs::create_directories(cfg.output_dir);
  for (int t = 0; t < cfg.trials; ++t) {
    const Trajectory& tr = mc.trials[t];
    write_trajectory_csv(
        (fs::path(cfg.output_dir) / ("trajectory_" + std::to_string(t) + ".csv"))
            .string(),
        tr.opt_err, tr.cons_err, tr.track_err, tr.gamma_k, tr.beta_k);
  }
  write_trajectory_csv(
      (fs::path(cfg.output_dir) / "trajectory_mean.csv").string(), mc.opt_mean,
      mc.cons_mean, mc.track_mean, mc.gamma_k, mc.beta_k);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  json meta{{"config", cfg.to_json()},
            {"version", kVersion},
            {"resolved_noise",
             {{"b_eta", ex.noise.b_eta}, {"b_xi", ex.noise.b_xi}}},
            {"wall_time_s", wall}};
  if (ex.budget) meta["budget"] = budget_to_json(*ex.budget);

  json summary{{"final_opt_err", mc.opt_mean.back()},
               {"final_cons_err", mc.cons_mean.back()},
               {"final_track_err", mc.track_mean.back()},
               {"max_tracking_violation", mc.max_tracking_violation}};
  try {
    const ProblemConstants pc = ProblemConstants::from(ex.wm, ex.obj, ex.noise);
    const StepsizeCheck chk = thm1_stepsize_check(
        pc, ex.sched.p, ex.sched.q, ex.sched.alpha, ex.sched.gamma);
    summary["decay_regime"] = {{"case", chk.case_id},
                               {"satisfied", chk.satisfied},
                               {"opt_exponent", chk.opt_exponent},
                               {"cons_exponent", chk.cons_exponent},
                               {"opt_has_constant_floor",
                                chk.opt_has_constant_floor}};
  } catch (const NoCaseMatches&) {
    summary["decay_regime"] = "none";
  }
  meta["summary"] = summary;

  std::ofstream mf(fs::path(cfg.output_dir) / "meta.json");
  mf << meta.dump(2) << '\n';
  mf.close();

  out << "wrote " << cfg.trials << " trajectories + mean to " << cfg.output_dir
      << "\n";
  out << summary.dump(2) << '\n';
  if (ex.budget) out << "privacy budget: " << budget_to_json(*ex.budget).dump(2) << '\n';
  return kExitOk;
}

int cmd_budget(const json& config, std::ostream& out) {
  const RunConfig cfg = RunConfig::parse(unwrap_config(config));
  std::optional<int> horizon = cfg.horizon;
  if (cfg.noise.contains("calibrate"))
    throw ConfigError("budget: resolve calibration first (run `calibrate`)");
  const json& raw = unwrap_config(config);
  if (raw.contains("budget") && raw.at("budget").is_object() &&
      raw.at("budget").contains("horizon"))
    horizon = parse_horizon_field(raw.at("budget"), "horizon");

  PrivacyQuery q = query_from_config(cfg, horizon);
  q.horizon = horizon;
  const PrivacyReport rep =
      horizon ? finite_horizon_budget(q) : infinite_horizon_budget(q);
  const json j = budget_to_json(rep);
  fs::create_directories(cfg.output_dir);
  std::ofstream f(fs::path(cfg.output_dir) / "budget.json");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_calibrate(const json& config, std::ostream& out) {
  const RunConfig cfg = RunConfig::parse(unwrap_config(config));
  if (!cfg.noise.contains("calibrate"))
    throw ConfigError("calibrate: config.noise.calibrate section required");
  const Experiment ex = resolve_experiment(cfg);
  json j{{"b_eta", ex.noise.b_eta}, {"b_xi", ex.noise.b_xi}};
  if (ex.budget) j["achieved"] = budget_to_json(*ex.budget);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_bounds(const json& config, std::ostream& out) {
  const RunConfig cfg = RunConfig::parse(unwrap_config(config));
  const Experiment ex = resolve_experiment(cfg);
  const ProblemConstants pc = ProblemConstants::from(ex.wm, ex.obj, ex.noise);

  json j{{"mu", pc.mu},
         {"ell", pc.ell},
         {"rho_w", pc.rho_w},
         {"rho_wo", pc.rho_wo},
         {"cor1_stepsize_bound", cor1_stepsize_bound(pc)},
         {"prior_stepsize_bound", prior_stepsize_bound(pc, ex.wm)},
         {"thm3_stepsize_bound", thm3_stepsize_bound(pc)},
         {"thm4_stepsize_bound", thm4_stepsize_bound(pc)},
         {"c41", c41_const(pc)},
         {"c42_thm1", c42_thm1(pc)},
         {"c42_cor1", c42_cor1(pc)}};
  try {
    const StepsizeCheck chk = thm1_stepsize_check(
        pc, ex.sched.p, ex.sched.q, ex.sched.alpha, ex.sched.gamma);
    j["decay_regime"] = {{"case", chk.case_id},
                         {"satisfied", chk.satisfied},
                         {"binding", chk.binding},
                         {"bound", chk.bound},
                         {"opt_exponent", chk.opt_exponent},
                         {"cons_exponent", chk.cons_exponent}};
  } catch (const NoCaseMatches& e) {
    j["decay_regime"] = e.what();
  }
  try {
    const BoundSystem bs = thm3_system(pc, ex.sched.alpha);
    j["rho_a"] = bs.rho_a;
    const SteadyState ss = steady_state_error(bs, pc.n);
    j["theta1"] = ss.theta1;
    j["theta2"] = ss.theta2;
    j["theta"] = ss.theta;
    const auto [t1, t2] = closed_form_theta(pc, ex.sched.alpha);
    j["theta1_closed_form"] = t1;
    j["theta2_closed_form"] = t2;
  } catch (const Error& e) {
    j["steady_state"] = e.what();
  }

  fs::create_directories(cfg.output_dir);
  std::ofstream f(fs::path(cfg.output_dir) / "bounds.json");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const json& config, std::ostream& out) {
  const json& raw = unwrap_config(config);
  const RunConfig cfg = RunConfig::parse(raw);
  if (!raw.contains("sweep") || !raw.at("sweep").is_object())
    throw ConfigError("sweep: config.sweep section required");
  const json& sw = raw.at("sweep");

  std::vector<double> rho_w_grid, rho_wo_grid;
  if (sw.contains("ring_r") && sw.at("ring_r").is_number()) {
    // Fixed rho_wo = r, rho_w swept through the ring identity 1 - r(1-d).
    const double r = sw.at("ring_r").get<double>();
    rho_wo_grid = {r};
    for (const double d : sw.at("ring_d").get<std::vector<double>>())
      rho_w_grid.push_back(1.0 - r * (1.0 - d));
  } else if (sw.contains("ring_r")) {
    // rho_wo swept through r at a pinned rho_w.
    rho_wo_grid = sw.at("ring_r").get<std::vector<double>>();
    rho_w_grid = {sw.at("rho_w").get<double>()};
  } else {
    rho_w_grid = sw.at("rho_w").get<std::vector<double>>();
    rho_wo_grid = sw.at("rho_wo").get<std::vector<double>>();
  }

  ProblemConstants tmpl;
  if (sw.contains("constants")) {
    const json& c = sw.at("constants");
    tmpl.mu = c.at("mu").get<double>();
    tmpl.ell = c.at("ell").get<double>();
    tmpl.n = c.at("n").get<int>();
    tmpl.r = c.value("r", 1);
    tmpl.d_i_sq = tmpl.n - 1;
    const Experiment ex = resolve_experiment(cfg);
    tmpl.sigma_eta_sq = ex.noise.sigma_eta_sq(tmpl.n, tmpl.r);
    tmpl.sigma_xi_sq = ex.noise.sigma_xi_sq(tmpl.n, tmpl.r);
    tmpl.c_star = 0;
  } else {
    const Experiment ex = resolve_experiment(cfg);
    tmpl = ProblemConstants::from(ex.wm, ex.obj, ex.noise);
  }

  const auto points =
      monotonicity_probe(tmpl, cfg.schedule.alpha, rho_w_grid, rho_wo_grid);

  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "sweep.csv").string();
  std::ofstream f(path);
  f << "rho_w,rho_wo,theta,fd_sign_rhow,fd_sign_rhowo\n";
  for (const auto& pt : points)
    f << fmt17(pt.rho_w) << ',' << fmt17(pt.rho_wo) << ',' << fmt17(pt.theta)
      << ',' << pt.fd_sign_rhow << ',' << pt.fd_sign_rhowo << '\n';
  out << "wrote " << points.size() << " sweep points to " << path << '\n';
  return kExitOk;
}

int cmd_rate_fit(const std::vector<std::string>& csv_paths,
                 double burn_in_frac, std::optional<double> m_override,
                 std::ostream& out) {
  if (csv_paths.empty()) throw ConfigError("rate-fit: no trajectory files given");
  json results = json::array();
  for (const auto& path : csv_paths) {
    double m = 1.0;
    if (m_override) {
      m = *m_override;
    } else {
      const fs::path meta_path = fs::path(path).parent_path() / "meta.json";
      if (fs::exists(meta_path)) {
        std::ifstream mf(meta_path);
        json meta = json::parse(mf);
        m = meta.at("config").at("schedule").at("m").get<double>();
      }
    }
    const TrajectoryColumns cols = read_trajectory_csv(path);
    json entry{{"file", path}, {"m", m}};
    const std::pair<const char*, const std::vector<double>*> channels[] = {
        {"opt_err", &cols.opt_err},
        {"cons_err", &cols.cons_err},
        {"track_err", &cols.track_err}};
    for (const auto& [name, err] : channels) {
      const RateFit fit = fit_power_law(*err, m, burn_in_frac);
      entry[name] = {{"slope", fit.slope},
                     {"stderr", fit.stderr_slope},
                     {"r_squared", fit.r_squared},
                     {"points", fit.points}};
    }
    results.push_back(entry);
  }
  out << results.dump(2) << '\n';
  return kExitOk;
}

int exit_code_for(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfigError;
  if (dynamic_cast<const HypothesisViolated*>(&e) ||
      dynamic_cast<const NotContractive*>(&e) ||
      dynamic_cast<const StepsizeTooLarge*>(&e) ||
      dynamic_cast<const NoCaseMatches*>(&e))
    return kExitHypothesisViolation;
  return 1;
}

}  // namespace dpgt
