#pragma once

#include <Eigen/Dense>

#include "dpgt/errors.hpp"

namespace dpgt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Validation tolerances for coupling matrices.
inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;
// Entries below this magnitude do not count as graph edges.
inline constexpr double kEdgeTol = 1e-15;

// An inter-agent coupling matrix that has passed validation: nonnegative,
// symmetric, doubly stochastic, positive diagonal, and with a connected
// off-diagonal support graph. Immutable after construction; safe to share
// read-only across concurrent workers.
class WeightMatrix {
 public:
  // Validates a candidate matrix. Throws NegativeEntry, NotSymmetric,
  // NotDoublyStochastic, NonPositiveDiagonal, or Disconnected with the
  // offending indices in the message. OutOfRange for non-square or n < 2.
  static WeightMatrix validate(const Matrix& w);

  const Matrix& w() const { return w_; }
  int n() const { return static_cast<int>(w_.rows()); }

  // W with its diagonal zeroed.
  Matrix off_diagonal() const;
  Vector diagonal() const { return w_.diagonal(); }

 private:
  explicit WeightMatrix(Matrix w) : w_(std::move(w)) {}
  Matrix w_;
};

// Spectral quantities of a coupling matrix consumed by the error-bound and
// privacy formulas. Matrix norms follow the column-stacked convention, which
// coincides with the Frobenius norm; hence d_i_sq = n - 1.
struct SpectralProfile {
  double rho_w = 0;       // spectral radius of W - (1/n) 11^T
  double rho_wo = 0;      // spectral radius of W_o
  double d_i_sq = 0;      // ||I - 11^T/n||^2 = n - 1
  double norm_wo_sq = 0;  // ||W_o||^2 (Frobenius)
  double norm_v_sq = 0;   // ||W_o^T 1||^2
};

SpectralProfile spectral_profile(const WeightMatrix& wm);

// Four agents on a ring with alternating edge weights r(1+d)/2 and r(1-d)/2
// and self-weight 1-r. For 0 < r <= 1/2 and 0 < d < 1 the spectrum is known
// in closed form:
//   rho(W_o) = r,   rho_w = 1 - r(1-d),
// so the two radii can be tuned independently. Throws OutOfRange outside
// that parameter range (the identities fail for r > 1/2).
WeightMatrix make_ring_weights(double r, double d);

// (1/n) 11^T, the fully-mixing matrix with rho_w = 0.
WeightMatrix make_averaging_weights(int n);

// Spectral radius of a symmetric matrix by power iteration; cross-check for
// the eigendecomposition path.
double power_iteration_rho(const Matrix& m, int max_iters = 100000,
                           double tol = 1e-13);

// ||W - I||^2 (Frobenius), used by the competing stepsize bound.
double norm_w_minus_i_sq(const WeightMatrix& wm);

}  // namespace dpgt
