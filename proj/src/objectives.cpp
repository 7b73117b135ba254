#include "dpgt/objectives.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "dpgt/randomness.hpp"

namespace dpgt {

using nlohmann::json;

Vector ObjectiveSet::gradient(int i, const Vector& x) const {
  return 2.0 * (quad[i] * x) + lin[i];
}

double ObjectiveSet::value(int i, const Vector& x) const {
  return x.dot(quad[i] * x) + lin[i].dot(x) + offset[i];
}

Matrix ObjectiveSet::gradient_all(const Matrix& x) const {
  Matrix g(n, r);
  for (int i = 0; i < n; ++i)
    g.row(i) = gradient(i, x.row(i).transpose()).transpose();
  return g;
}

Matrix ObjectiveSet::gradient_all_clipped(const Matrix& x) const {
  Matrix g(n, r);
  for (int i = 0; i < n; ++i)
    g.row(i) =
        clip_gradient(gradient(i, x.row(i).transpose()), c_bound).transpose();
  return g;
}

Vector ObjectiveSet::average_gradient(const Vector& x) const {
  Vector g = Vector::Zero(r);
  for (int i = 0; i < n; ++i) g += gradient(i, x);
  return g / n;
}

double ObjectiveSet::average_value(const Vector& x) const {
  double v = 0;
  for (int i = 0; i < n; ++i) v += value(i, x);
  return v / n;
}

double ObjectiveSet::grad_norm_sq_at_optimum() const {
  double total = 0;
  for (int i = 0; i < n; ++i) total += gradient(i, x_star).squaredNorm();
  return total;
}

namespace {

// Exact max of ||x - a|| over an axis-aligned box (attained at a corner).
double max_distance_to_box(const Vector& a, const Vector& lo,
                           const Vector& hi) {
  double sq = 0;
  for (int j = 0; j < a.size(); ++j) {
    const double d = std::max(std::fabs(lo(j) - a(j)), std::fabs(hi(j) - a(j)));
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

ObjectiveSet make_rendezvous(const std::vector<Vector>& targets) {
  if (targets.empty()) throw EmptyTargets("rendezvous: no targets given");
  const int n = static_cast<int>(targets.size());
  if (n < 2) throw OutOfRange("rendezvous: need at least two agents");
  const int r = static_cast<int>(targets[0].size());
  for (const auto& a : targets)
    if (a.size() != r)
      throw DimensionMismatch("rendezvous: targets of mixed dimension");

  ObjectiveSet obj;
  obj.n = n;
  obj.r = r;
  obj.mu = 2.0;
  obj.ell = 2.0;
  obj.family_ = "rendezvous";

  Vector lo = targets[0], hi = targets[0], mean = Vector::Zero(r);
  for (const auto& a : targets) {
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(a);
    mean += a;
  }
  obj.x_star = mean / n;
  // Bounding box of the targets inflated by 50% per side, at least unit
  // half-width so degenerate target sets still give a usable domain.
  for (int j = 0; j < r; ++j) {
    const double c = 0.5 * (lo(j) + hi(j));
    const double half = std::max(0.75 * (hi(j) - lo(j)), 1.0);
    lo(j) = c - half;
    hi(j) = c + half;
  }
  obj.box_lo = lo;
  obj.box_hi = hi;

  obj.quad.assign(n, Matrix::Identity(r, r));
  obj.lin.reserve(n);
  obj.offset.reserve(n);
  double c_bound = 0;
  for (const auto& a : targets) {
    obj.lin.push_back(-2.0 * a);
    obj.offset.push_back(a.squaredNorm());
    c_bound = std::max(c_bound, 2.0 * max_distance_to_box(a, lo, hi));
  }
  obj.c_bound = c_bound;
  return obj;
}

ObjectiveSet make_ridge(int n, int r, double rho_pen, std::uint64_t seed,
                        double noise_sd) {
  if (n < 1 || r < 1) throw OutOfRange("ridge: n and r must be positive");
  if (!(rho_pen > 0)) throw OutOfRange("ridge: penalty must be positive");
  if (noise_sd < 0) throw OutOfRange("ridge: noise_sd must be nonnegative");

  // Dedicated sub-streams per variable keep instances reproducible
  // bit-for-bit and independent of generation order.
  const Rng root(seed);
  const Rng rng_u = root.derive(101);
  const Rng rng_xt = root.derive(102);
  const Rng rng_zeta = root.derive(103);

  Matrix u(n, r), x_tilde(n, r);
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) {
      u(i, j) = -1.0 + 2.0 * rng_u.uniform_at3(0, i, j);
      x_tilde(i, j) = 10.0 * rng_xt.uniform_at3(0, i, j);
    }
    v(i) = u.row(i).dot(x_tilde.row(i)) + rng_zeta.normal_at(noise_sd, i);
  }

  ObjectiveSet obj;
  obj.n = n;
  obj.r = r;
  obj.family_ = "ridge";
  obj.rho_pen_ = rho_pen;
  obj.seed_ = seed;
  obj.noise_sd_ = noise_sd;
  obj.quad.reserve(n);
  obj.lin.reserve(n);
  obj.offset.reserve(n);
  double max_u_sq = 0;
  for (int i = 0; i < n; ++i) {
    const Vector ui = u.row(i).transpose();
    obj.quad.push_back(ui * ui.transpose() +
                       rho_pen * Matrix::Identity(r, r));
    obj.lin.push_back(-2.0 * v(i) * ui);
    obj.offset.push_back(v(i) * v(i));
    max_u_sq = std::max(max_u_sq, ui.squaredNorm());
  }
  obj.mu = 2.0 * rho_pen;
  obj.ell = 2.0 * (max_u_sq + rho_pen);
  obj.box_lo = Vector::Constant(r, -20.0);
  obj.box_hi = Vector::Constant(r, 20.0);

  // Exact normal equations, noise terms included: the printed noise-free
  // closed form is recovered when noise_sd = 0.
  Matrix gram = n * rho_pen * Matrix::Identity(r, r);
  Vector rhs = Vector::Zero(r);
  for (int i = 0; i < n; ++i) {
    const Vector ui = u.row(i).transpose();
    gram += ui * ui.transpose();
    rhs += v(i) * ui;
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("ridge: normal equations not positive definite");
  obj.x_star = llt.solve(rhs);

  // Gradient bound over the box via the triangle inequality
  // ||grad f_i(x)|| <= 2(||u_i||^2 + rho) ||x|| + 2 |v_i| ||u_i||.
  const double box_radius = obj.box_hi.norm();
  double c_bound = 0;
  for (int i = 0; i < n; ++i) {
    const double ui_norm = u.row(i).norm();
    c_bound = std::max(c_bound,
                       2.0 * (ui_norm * ui_norm + rho_pen) * box_radius +
                           2.0 * std::fabs(v(i)) * ui_norm);
  }
  obj.c_bound = c_bound;
  return obj;
}

Vector clip_gradient(const Vector& g, double c_bound) {
  if (!(c_bound > 0)) throw OutOfRange("clip: bound must be positive");
  const double norm = g.norm();
  if (norm <= c_bound) return g;
  return g * (c_bound / norm);
}

double finite_difference_check(const ObjectiveSet& obj, int i, const Vector& x,
                               double h) {
  if (!(h > 0)) throw OutOfRange("finite differences: h must be positive");
  const Vector g = obj.gradient(i, x);
  double worst = 0;
  Vector xp = x, xm = x;
  for (int j = 0; j < obj.r; ++j) {
    xp(j) += h;
    xm(j) -= h;
    const double fd = (obj.value(i, xp) - obj.value(i, xm)) / (2.0 * h);
    worst = std::max(worst, std::fabs(fd - g(j)));
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return worst;
}

json ObjectiveSet::to_json() const {
  json j;
  j["type"] = family_;
  if (family_ == "rendezvous") {
    json targets = json::array();
    for (int i = 0; i < n; ++i) {
      const Vector a = -0.5 * lin[i];
      targets.push_back(std::vector<double>(a.data(), a.data() + a.size()));
    }
    j["targets"] = targets;
  } else {
    // Ridge instances round-trip through their generator inputs; the seed
    // regenerates the features and noise exactly.
    j["n"] = n;
    j["r"] = r;
    j["rho_pen"] = rho_pen_;
    j["seed"] = seed_;
    j["noise_sd"] = noise_sd_;
  }
  return j;
}

ObjectiveSet ObjectiveSet::from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rendezvous") {
    std::vector<Vector> targets;
    for (const auto& row : j.at("targets")) {
      const auto vals = row.get<std::vector<double>>();
      targets.push_back(Eigen::Map<const Vector>(vals.data(), vals.size()));
    }
    return make_rendezvous(targets);
  }
  if (type == "ridge") {
    return make_ridge(j.at("n").get<int>(), j.at("r").get<int>(),
                      j.at("rho_pen").get<double>(),
                      j.at("seed").get<std::uint64_t>(),
                      j.value("noise_sd", 25.0));
  }
  throw ConfigError("unknown objective family: " + type);
}

}  // namespace dpgt
