#include "dpgt/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace dpgt {

namespace {

// Sub-stream tags under the master seed. Trials live under their own branch
// so trial indices cannot collide with the other first-level tags.
constexpr std::uint64_t kTagEta = 1;
constexpr std::uint64_t kTagXi = 2;
constexpr std::uint64_t kTagInit = 3;
constexpr std::uint64_t kTagTrialBase = 4;

Matrix draw_noise(const Rng& channel, double b, int k, int n, int r) {
  Matrix out(n, r);
  if (b == 0) {
    out.setZero();
    return out;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j)
      out(i, j) = channel.laplace_at3(b, static_cast<std::uint64_t>(k), i, j);
  return out;
}

}  // namespace

AlgoState step(const AlgoState& state, const WeightMatrix& wm,
               const ObjectiveSet& obj, const Schedule& sched,
               const Matrix& eta, const Matrix& xi, bool clip) {
  const int n = wm.n();
  const int r = obj.r;
  if (state.x.rows() != n || state.x.cols() != r || state.s.rows() != n ||
      state.s.cols() != r || eta.rows() != n || eta.cols() != r ||
      xi.rows() != n || xi.cols() != r || obj.n != n)
    throw DimensionMismatch("step: state/noise/objective shapes disagree");

  const double gamma_k = sched.gamma_at(state.k);
  const double beta_k = sched.beta_at(state.k);
  const Matrix wo = wm.off_diagonal();
  const Matrix grad =
      clip ? obj.gradient_all_clipped(state.x) : obj.gradient_all(state.x);

  AlgoState next;
  next.s = wm.w() * state.s + wo * (beta_k * eta) + gamma_k * grad;
  next.x = wm.w() * state.x + wo * (beta_k * xi) - sched.alpha * (next.s - state.s);
  next.k = state.k + 1;
  return next;
}

Matrix default_x0(const ObjectiveSet& obj, std::uint64_t seed) {
  const Rng init = Rng(seed).derive(kTagInit);
  Matrix x0(obj.n, obj.r);
  for (int i = 0; i < obj.n; ++i)
    for (int j = 0; j < obj.r; ++j)
      x0(i, j) = obj.box_lo(j) +
                 (obj.box_hi(j) - obj.box_lo(j)) * init.uniform_at3(0, i, j);
  return x0;
}

Trajectory run(const WeightMatrix& wm, const ObjectiveSet& obj,
               const Schedule& sched, const NoiseParams& noise,
               const RunOptions& opts) {
  sched.check();
  if (opts.horizon < 1) throw OutOfRange("run: horizon must be >= 1");
  const int n = wm.n();
  const int r = obj.r;
  if (obj.n != n) throw DimensionMismatch("run: objective/topology agent counts differ");
  const int K = opts.horizon;

  const Rng trial_rng = Rng(opts.seed).derive(kTagTrialBase).derive(opts.trial);
  const Rng rng_eta = trial_rng.derive(kTagEta);
  const Rng rng_xi = trial_rng.derive(kTagXi);

  AlgoState state;
  state.x = opts.x0 ? *opts.x0 : default_x0(obj, opts.seed);
  if (state.x.rows() != n || state.x.cols() != r)
    throw DimensionMismatch("run: x0 has wrong shape");
  state.s = Matrix::Zero(n, r);
  state.k = 0;

  Trajectory traj;
  traj.opt_err.resize(K + 1);
  traj.cons_err.resize(K + 1);
  traj.track_err.resize(K + 1);
  traj.gamma_k.resize(K + 1);
  traj.beta_k.resize(K + 1);
  if (opts.record_xbar) traj.xbar = Matrix::Zero(K + 1, r);

  const Matrix wo = wm.off_diagonal();
  const Vector ones = Vector::Ones(n);
  const Vector v = wo.transpose() * ones;  // column sums of W_o

  for (int k = 0; k <= K; ++k) {
    const double gamma_k = sched.gamma_at(k);
    const double beta_k = sched.beta_at(k);
    traj.gamma_k[k] = gamma_k;
    traj.beta_k[k] = beta_k;

    const Vector xbar = state.x.colwise().mean().transpose();
    traj.opt_err[k] = (xbar - obj.x_star).squaredNorm();
    traj.cons_err[k] =
        (state.x - ones * xbar.transpose()).squaredNorm();
    if (opts.record_xbar) traj.xbar.row(k) = xbar.transpose();

    const Matrix eta = draw_noise(rng_eta, noise.b_eta, k, n, r);
    const Matrix xi = draw_noise(rng_xi, noise.b_xi, k, n, r);
    const Matrix grad = opts.clip ? obj.gradient_all_clipped(state.x)
                                  : obj.gradient_all(state.x);
    const Matrix s_next =
        wm.w() * state.s + wo * (beta_k * eta) + gamma_k * grad;

    // Tracker increment and its consensus error for index k; at k = K this
    // uses iteration K's tracker update without advancing the decisions.
    const Matrix y = s_next - state.s;
    const Vector ybar = y.colwise().mean().transpose();
    traj.track_err[k] = (y - ones * ybar.transpose()).squaredNorm();

    // Tracking identity 1^T y_k = 1^T (gamma_k grad F(x_k) + W_o beta_k eta_k).
    const Vector lhs = y.transpose() * ones;
    const Vector rhs = (gamma_k * grad + wo * (beta_k * eta)).transpose() * ones;
    const double rel = (lhs - rhs).norm() / (1.0 + lhs.norm());
    traj.max_tracking_violation = std::max(traj.max_tracking_violation, rel);

    if (k < K) {
      const Matrix x_next =
          wm.w() * state.x + wo * (beta_k * xi) - sched.alpha * y;

      // Mean-decrement identity
      // xbar_{k+1} - xbar_k = -alpha gamma_k h_k
      //                       - (alpha/n) v^T beta_k eta_k
      //                       + (1/n)     v^T beta_k xi_k.
      const Vector xbar_next = x_next.colwise().mean().transpose();
      const Vector h = grad.colwise().mean().transpose();
      const Vector predicted =
          -sched.alpha * gamma_k * h -
          (sched.alpha / n) * (eta.transpose() * v) * beta_k +
          (1.0 / n) * (xi.transpose() * v) * beta_k;
      const double mean_resid = (xbar_next - xbar - predicted).norm();
      traj.max_mean_dynamics_violation =
          std::max(traj.max_mean_dynamics_violation, mean_resid);
      state.x = x_next;
      state.s = s_next;
      state.k = k + 1;
    }
  }
  return traj;
}

MonteCarloResult monte_carlo(const WeightMatrix& wm, const ObjectiveSet& obj,
                             const Schedule& sched, const NoiseParams& noise,
                             const RunOptions& opts, int trials, int threads) {
  if (trials < 1) throw OutOfRange("monte_carlo: trials must be >= 1");
  MonteCarloResult mc;
  mc.trials.resize(trials);

  // Shared initial state: trials differ only in their noise sub-streams.
  RunOptions base = opts;
  base.record_xbar = false;
  if (!base.x0) base.x0 = default_x0(obj, opts.seed);

  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, trials));

  std::atomic<int> next_trial{0};
  auto worker = [&]() {
    for (;;) {
      const int t = next_trial.fetch_add(1);
      if (t >= trials) return;
      RunOptions ro = base;
      ro.trial = static_cast<std::uint64_t>(t);
      mc.trials[t] = run(wm, obj, sched, noise, ro);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const int K = opts.horizon;
  mc.gamma_k = mc.trials[0].gamma_k;
  mc.beta_k = mc.trials[0].beta_k;
  auto reduce = [&](auto getter, std::vector<double>& mean,
                    std::vector<double>& se) {
    mean.assign(K + 1, 0.0);
    se.assign(K + 1, 0.0);
    for (const auto& t : mc.trials) {
      const auto& e = getter(t);
      for (int k = 0; k <= K; ++k) {
        mean[k] += e[k];
        se[k] += e[k] * e[k];
      }
    }
    for (int k = 0; k <= K; ++k) {
      mean[k] /= trials;
      const double var =
          std::max(0.0, se[k] / trials - mean[k] * mean[k]);
      se[k] = trials > 1 ? std::sqrt(var / trials) : 0.0;
    }
  };
  reduce([](const Trajectory& t) -> const std::vector<double>& { return t.opt_err; },
         mc.opt_mean, mc.opt_se);
  reduce([](const Trajectory& t) -> const std::vector<double>& { return t.cons_err; },
         mc.cons_mean, mc.cons_se);
  reduce([](const Trajectory& t) -> const std::vector<double>& { return t.track_err; },
         mc.track_mean, mc.track_se);
  for (const auto& t : mc.trials)
    mc.max_tracking_violation =
        std::max(mc.max_tracking_violation, t.max_tracking_violation);
  return mc;
}

}  // namespace dpgt
