#include "dpgt/topology.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace dpgt {

WeightMatrix WeightMatrix::validate(const Matrix& w) {
  const auto rows = w.rows();
  if (rows != w.cols() || rows < 2)
    throw OutOfRange("weight matrix must be square with n >= 2");
  const int n = static_cast<int>(rows);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) < 0) {
        std::ostringstream msg;
        msg << "negative coupling weight at (" << i << "," << j
            << "): " << w(i, j);
        throw NegativeEntry(msg.str());
      }

  if ((w - w.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw NotSymmetric("coupling matrix is not symmetric within 1e-12");

  for (int i = 0; i < n; ++i) {
    if (std::fabs(w.row(i).sum() - 1.0) > kStochasticTol ||
        std::fabs(w.col(i).sum() - 1.0) > kStochasticTol) {
      std::ostringstream msg;
      msg << "row/column " << i << " does not sum to 1 within 1e-12";
      throw NotDoublyStochastic(msg.str());
    }
  }

  for (int i = 0; i < n; ++i)
    if (!(w(i, i) > 0)) {
      std::ostringstream msg;
      msg << "diagonal entry " << i << " is not positive";
      throw NonPositiveDiagonal(msg.str());
    }

  // Breadth-first reachability over the off-diagonal support.
  std::vector<char> seen(n, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.back();
    queue.pop_back();
    for (int v = 0; v < n; ++v)
      if (v != u && !seen[v] && w(u, v) > kEdgeTol) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
  }
  if (reached != n)
    throw Disconnected("off-diagonal support graph is not connected");

  return WeightMatrix(w);
}

Matrix WeightMatrix::off_diagonal() const {
  Matrix wo = w_;
  wo.diagonal().setZero();
  return wo;
}

SpectralProfile spectral_profile(const WeightMatrix& wm) {
  const int n = wm.n();
  const Matrix& w = wm.w();
  const Matrix ones = Matrix::Constant(n, n, 1.0 / n);

  Eigen::SelfAdjointEigenSolver<Matrix> es_w(w - ones,
                                             Eigen::EigenvaluesOnly);
  const Matrix wo = wm.off_diagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es_wo(wo, Eigen::EigenvaluesOnly);

  SpectralProfile sp;
  sp.rho_w = es_w.eigenvalues().cwiseAbs().maxCoeff();
  sp.rho_wo = es_wo.eigenvalues().cwiseAbs().maxCoeff();
  sp.d_i_sq = n - 1;
  sp.norm_wo_sq = wo.squaredNorm();
  sp.norm_v_sq = (wo.transpose() * Vector::Ones(n)).squaredNorm();
  return sp;
}

WeightMatrix make_ring_weights(double r, double d) {
  if (!(r > 0) || !(r <= 0.5))
    throw OutOfRange("ring weights: require 0 < r <= 0.5");
  if (!(d > 0) || !(d < 1)) throw OutOfRange("ring weights: require 0 < d < 1");

  // Alternating edge weights around the 4-cycle. The eigenvalues of W_o are
  // {r, -r, +-(a-b)} with a+b = r, so rho(W_o) = r, and the nontrivial
  // eigenvalues of W are {1-2r, 1-r(1-d), 1-r(1+d)}, so rho_w = 1-r(1-d).
  const double a = r * (1.0 + d) / 2.0;
  const double b = r * (1.0 - d) / 2.0;
  Matrix w(4, 4);
  w << 1 - r, a, 0, b,
       a, 1 - r, b, 0,
       0, b, 1 - r, a,
       b, 0, a, 1 - r;
  return WeightMatrix::validate(w);
}

WeightMatrix make_averaging_weights(int n) {
  if (n < 2) throw OutOfRange("averaging weights: n >= 2 required");
  return WeightMatrix::validate(Matrix::Constant(n, n, 1.0 / n));
}

double power_iteration_rho(const Matrix& m, int max_iters, double tol) {
  const int n = static_cast<int>(m.rows());
  // Iterate on M^T M so symmetric spectra with +-lambda pairs still converge;
  // the radius is the square root of the dominant Rayleigh quotient.
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.37 * (i + 1);
  v.normalize();
  double lambda_sq = 0;
  for (int it = 0; it < max_iters; ++it) {
    Vector mv = m.transpose() * (m * v);
    const double next = v.dot(mv);
    const double norm = mv.norm();
    if (norm == 0) return 0;
    v = mv / norm;
    if (it > 0 &&
        std::fabs(next - lambda_sq) < tol * std::max(1.0, std::fabs(next))) {
      lambda_sq = next;
      break;
    }
    lambda_sq = next;
  }
  return std::sqrt(std::max(0.0, lambda_sq));
}

double norm_w_minus_i_sq(const WeightMatrix& wm) {
  return (wm.w() - Matrix::Identity(wm.n(), wm.n())).squaredNorm();
}

}  // namespace dpgt
