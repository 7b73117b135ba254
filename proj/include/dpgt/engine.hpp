#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpgt/objectives.hpp"
#include "dpgt/randomness.hpp"
#include "dpgt/topology.hpp"

namespace dpgt {

// Iterates of the tracked-gradient scheme. x holds the per-agent decision
// copies (n x r), s the cumulative-gradient trackers; the classical tracker
// is the increment y_k = s_{k+1} - s_k, derived rather than stored.
struct AlgoState {
  Matrix x;
  Matrix s;
  int k = 0;
};

// One update with explicitly supplied noise matrices (n x r each):
//   s_{k+1} = W s_k + W_o beta_k eta_k + gamma_k grad F(x_k)
//   x_{k+1} = W x_k + W_o beta_k xi_k  - alpha (s_{k+1} - s_k).
// Only the off-diagonal part of W touches the noise: each agent's
// self-weighted term uses its own un-noised state. When clip is set,
// per-agent gradients are clipped to obj.c_bound before the gamma_k scaling.
// Throws DimensionMismatch on inconsistent shapes.
AlgoState step(const AlgoState& state, const WeightMatrix& wm,
               const ObjectiveSet& obj, const Schedule& sched,
               const Matrix& eta, const Matrix& xi, bool clip = false);

// Per-iteration error records, paper-norm (Frobenius) convention:
//   opt_err_k   = ||xbar_k - x*||^2
//   cons_err_k  = ||x_k - 1 xbar_k^T||^2
//   track_err_k = ||y_k - 1 ybar_k^T||^2
struct Trajectory {
  std::vector<double> opt_err, cons_err, track_err;
  std::vector<double> gamma_k, beta_k;
  Matrix xbar;  // (K+1) x r; empty when not recorded
  // Largest relative residual of the tracking identity
  // 1^T y_k = 1^T (gamma_k grad F(x_k) + W_o beta_k eta_k) over the run,
  // scaled by 1 + ||1^T y_k||.
  double max_tracking_violation = 0;
  // Largest absolute residual of the mean-decrement identity
  // xbar_{k+1} - xbar_k = -alpha gamma_k h_k
  //                       - (alpha/n) v^T beta_k eta_k + (1/n) v^T beta_k xi_k.
  double max_mean_dynamics_violation = 0;

  int horizon() const { return static_cast<int>(opt_err.size()) - 1; }
};

struct RunOptions {
  int horizon = 0;         // K >= 1
  std::uint64_t seed = 0;  // master seed
  std::uint64_t trial = 0; // sub-stream index for Monte Carlo
  bool clip = false;
  // Fixed initial decision matrix; defaults to rows sampled uniformly in the
  // objective's domain box. Trackers always start at zero.
  std::optional<Matrix> x0;
  bool record_xbar = true;
};

// Runs K iterations and records the three error trajectories (length K+1,
// including the initial state; the final tracker increment draws iteration
// K's tracker noise without advancing x). Deterministic given (seed, trial).
Trajectory run(const WeightMatrix& wm, const ObjectiveSet& obj,
               const Schedule& sched, const NoiseParams& noise,
               const RunOptions& opts);

struct MonteCarloResult {
  // Elementwise means across trials; xbar not recorded.
  std::vector<double> opt_mean, cons_mean, track_mean;
  // Standard errors of those means.
  std::vector<double> opt_se, cons_se, track_se;
  std::vector<double> gamma_k, beta_k;
  std::vector<Trajectory> trials;  // per-trial store
  double max_tracking_violation = 0;
};

// Averages `trials` independent runs; trial t uses sub-stream t of the master
// seed. Trials execute concurrently when threads > 1 (0 = hardware default);
// results are identical regardless of thread count.
MonteCarloResult monte_carlo(const WeightMatrix& wm, const ObjectiveSet& obj,
                             const Schedule& sched, const NoiseParams& noise,
                             const RunOptions& opts, int trials,
                             int threads = 0);

// Initial decision matrix with rows uniform in the domain box (sub-stream
// shared by every trial of a seed, so Monte Carlo trials differ only in
// their noise realizations).
Matrix default_x0(const ObjectiveSet& obj, std::uint64_t seed);

}  // namespace dpgt
