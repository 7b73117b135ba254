#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dpgt/objectives.hpp"
#include "dpgt/randomness.hpp"
#include "dpgt/topology.hpp"

namespace dpgt {

// Every scalar the closed-form convergence objects depend on. Usually built
// from a validated topology, an objective set, and noise parameters, but the
// fields are plain data so synthetic instances (grids, probes) are cheap.
struct ProblemConstants {
  double mu = 0;
  double ell = 0;  // L >= mu
  int n = 0;
  int r = 0;
  double rho_w = 0;
  double rho_wo = 0;
  double d_i_sq = 0;      // n - 1
  double norm_wo_sq = 0;  // ||W_o||^2
  double norm_v_sq = 0;   // ||W_o^T 1||^2
  double sigma_eta_sq = 0;
  double sigma_xi_sq = 0;
  double c_star = 0;  // sum_i ||grad f_i(x*)||^2

  static ProblemConstants from(const WeightMatrix& wm, const ObjectiveSet& obj,
                               const NoiseParams& noise);
  // Copy with new spectral radii; the norm fields take their worst-case
  // values n rho_wo^2 and n^2 rho_wo^2. Used by grid probes.
  ProblemConstants with_spectra(double rho_w, double rho_wo) const;
};

// One step of the time-varying error recursion
//   [U, X, Y]_{k+1} <= A_k [U, X, Y]_k + B_k   (componentwise)
// on the second moments U = E||xbar - x*||^2, X = E||x - 1 xbar||^2,
// Y = E||y - 1 ybar||^2.
struct LinearSystem {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
};

// A_k and B_k at iteration k. Requires alpha gamma_0 < 2/(mu+L)
// (HypothesisViolated otherwise). The (1,2) and (3,2) entries carry the
// effective stepsize inside their constants and are evaluated per k.
LinearSystem lemma1_system(const ProblemConstants& pc, const Schedule& sched,
                           int k);

struct BoundSequence {
  // values[k] = (U_k, X_k, Y_k) for k = 0..K.
  std::vector<Eigen::Vector3d> values;
  bool diverged = false;  // some component exceeded 1e300
};

// Iterates the recursion from nonnegative initial bounds.
BoundSequence propagate_bound(const ProblemConstants& pc,
                              const Schedule& sched, double u0, double x0,
                              double y0, int horizon);

// Decay-regime classification for a (p, q) schedule pair with the matching
// stepsize condition and the predicted decay exponents of the three error
// channels (error_k <= O(1) / (m+k)^exponent). Case 3's optimization error
// additionally carries a constant floor.
struct StepsizeCheck {
  int case_id = 0;  // 1: p=0,q>0; 2: 0<p<=1,q>p; 3: p>1,q>=p/2
  bool satisfied = false;
  std::string binding;  // name of the binding constraint
  double bound = 0;     // the alpha*gamma threshold (cases 1-2)
  double opt_exponent = 0, cons_exponent = 0, track_exponent = 0;
  bool opt_has_constant_floor = false;
  // Compatibility with the recursion hypothesis alpha gamma_0 < 2/(mu+L):
  // for p > 0 any large enough m works; min_m is the smallest such m
  // (0 when every m > 0 works). For p = 0 feasibility is a direct check.
  bool feasible_with_lemma1 = false;
  double min_m = 0;
};

StepsizeCheck thm1_stepsize_check(const ProblemConstants& pc, double p,
                                  double q, double alpha, double gamma);

// The two printed variants of the quartic-term constant c42 (the flat-
// schedule case lists one, the geometric-rate corollary another); c41 is
// shared. Exposed so tests and reports can show which variant binds.
double c41_const(const ProblemConstants& pc);
double c42_thm1(const ProblemConstants& pc);
double c42_cor1(const ProblemConstants& pc);

// Geometric-rate stepsize bound on alpha*gamma:
//   min{ 2/(mu+L), (1-rho_w^2)/(4 sqrt2 L d_I),
//        sqrt(2 / (c42 + sqrt(c42^2 + 4 c41))) }   (c42 = c42_cor1).
double cor1_stepsize_bound(const ProblemConstants& pc);

// The competing bound from the prior constant-stepsize analysis; needs the
// full weight matrix for ||W - I||^2.
double prior_stepsize_bound(const ProblemConstants& pc,
                            const WeightMatrix& wm);

// Constant-stepsize bound system (gamma_k = beta_k = 1).
struct BoundSystem {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  double rho_a = 0;  // spectral radius of a
};

// A and B of the constant-stepsize recursion; requires alpha < 1/(mu+L).
BoundSystem thm3_system(const ProblemConstants& pc, double alpha);

// Stepsize threshold guaranteeing rho(A) < 1:
//   min{ 1/(mu+L), (1-rho_w^2)/(4 sqrt2 d_I L),
//        sqrt(2 d3 / (d2 + sqrt(d2^2 + 4 d1 d3))) }.
double thm3_stepsize_bound(const ProblemConstants& pc);

// Stricter threshold under which the steady-state error is provably
// monotone in both spectral radii (the middle arm tightens to
// (1-rho_w^2)/(8 d_I L)).
double thm4_stepsize_bound(const ProblemConstants& pc);

struct SteadyState {
  double theta1 = 0;  // asymptotic bound on E||xbar - x*||^2
  double theta2 = 0;  // asymptotic bound on E||x - 1 xbar||^2
  double theta = 0;   // 2 n theta1 + 2 theta2
};

// First two components of (I - A)^{-1} B by direct linear solve; throws
// NotContractive when rho(A) >= 1.
SteadyState steady_state_error(const BoundSystem& bs, int n);

// Hand-expanded rational closed forms of theta1, theta2 in T_w = 1-rho_w^2;
// cross-check for the linear solve.
std::pair<double, double> closed_form_theta(const ProblemConstants& pc,
                                            double alpha);

struct SweepPoint {
  double rho_w = 0, rho_wo = 0, theta = 0;
  // Sign of the successive difference along each axis (0 on the first point
  // of an axis).
  int fd_sign_rhow = 0, fd_sign_rhowo = 0;
};

// Steady-state error over a (rho_w, rho_wo) grid built from a template's
// non-spectral constants. Throws StepsizeTooLarge naming the first grid
// point where alpha violates the monotonicity stepsize condition.
std::vector<SweepPoint> monotonicity_probe(const ProblemConstants& tmpl,
                                           double alpha,
                                           const std::vector<double>& rho_w_grid,
                                           const std::vector<double>& rho_wo_grid);

// Spectral radius of a general real 3x3 matrix.
double spectral_radius3(const Eigen::Matrix3d& a);

}  // namespace dpgt
