#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpgt/topology.hpp"

namespace dpgt {

// A set of n per-agent strongly convex quadratic objectives
//   f_i(x) = x^T Q_i x + q_i^T x + c_i,   Q_i symmetric positive definite,
// with the analytic constants the convergence and privacy formulas consume:
// strong-convexity modulus mu, gradient Lipschitz constant ell, gradient
// bound c_bound over the box domain, and the exact minimizer x_star of the
// average objective. Immutable; gradient evaluation is pure and reentrant.
class ObjectiveSet {
 public:
  int n = 0;
  int r = 0;
  double mu = 0;
  double ell = 0;
  double c_bound = 0;
  Vector x_star;
  Vector box_lo, box_hi;  // axis-aligned domain box

  Vector gradient(int i, const Vector& x) const;
  double value(int i, const Vector& x) const;
  // Stacked per-agent gradients: row i is grad f_i(x.row(i)).
  Matrix gradient_all(const Matrix& x) const;
  Matrix gradient_all_clipped(const Matrix& x) const;
  // (1/n) sum_i grad f_i(x) at a common point.
  Vector average_gradient(const Vector& x) const;
  double average_value(const Vector& x) const;
  // c* = sum_i ||grad f_i(x_star)||^2.
  double grad_norm_sq_at_optimum() const;

  // Round-trippable description (family tag plus generating parameters), so
  // an experiment can be replayed exactly from its metadata.
  nlohmann::json to_json() const;
  static ObjectiveSet from_json(const nlohmann::json& j);

  // Quadratic data, exposed for tests.
  std::vector<Matrix> quad;    // Q_i
  std::vector<Vector> lin;     // q_i
  std::vector<double> offset;  // c_i

 private:
  friend ObjectiveSet make_rendezvous(const std::vector<Vector>& targets);
  friend ObjectiveSet make_ridge(int n, int r, double rho_pen,
                                 std::uint64_t seed, double noise_sd);
  std::string family_;
  // Ridge generator inputs; the seed regenerates the instance exactly.
  double rho_pen_ = 0;
  std::uint64_t seed_ = 0;
  double noise_sd_ = 0;
};

// Rendezvous: f_i(x) = ||x - a_i||^2 with per-agent target a_i. mu = ell = 2,
// x_star = mean of targets. The domain box is the bounding box of the
// targets inflated by 50% per side (at least unit half-width), and c_bound
// is the exact maximum of 2||x - a_i|| over the box. Throws EmptyTargets.
ObjectiveSet make_rendezvous(const std::vector<Vector>& targets);

// Ridge regression: f_i(x) = (u_i^T x - v_i)^2 + rho_pen ||x||^2 with
// u_i ~ U[-1,1]^r, x_tilde_i ~ U[0,10]^r, v_i = u_i^T x_tilde_i + zeta_i,
// zeta_i ~ Normal(0, noise_sd^2). Deterministic given the seed. x_star
// solves the exact normal equations (sum u_i u_i^T + n rho_pen I) x =
// sum u_i v_i, which include the noise terms; the noise-free closed form
// (sum u_i u_i^T + n rho_pen I)^{-1} sum u_i u_i^T x_tilde_i is recovered
// when noise_sd = 0. mu = 2 rho_pen, ell = 2(max_i ||u_i||^2 + rho_pen),
// domain box [-20, 20]^r.
ObjectiveSet make_ridge(int n, int r, double rho_pen, std::uint64_t seed,
                        double noise_sd = 25.0);

// Scales g to norm c_bound when ||g|| exceeds it; identity otherwise.
Vector clip_gradient(const Vector& g, double c_bound);

// Max componentwise deviation between the analytic gradient of f_i at x and
// a central finite difference with step h.
double finite_difference_check(const ObjectiveSet& obj, int i, const Vector& x,
                               double h);

}  // namespace dpgt
