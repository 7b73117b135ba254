#include "dpgt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dpgt {

ProblemConstants ProblemConstants::from(const WeightMatrix& wm,
                                        const ObjectiveSet& obj,
                                        const NoiseParams& noise) {
  if (wm.n() != obj.n)
    throw DimensionMismatch("constants: topology/objective agent counts differ");
  const SpectralProfile sp = spectral_profile(wm);
  ProblemConstants pc;
  pc.mu = obj.mu;
  pc.ell = obj.ell;
  pc.n = obj.n;
  pc.r = obj.r;
  pc.rho_w = sp.rho_w;
  pc.rho_wo = sp.rho_wo;
  pc.d_i_sq = sp.d_i_sq;
  pc.norm_wo_sq = sp.norm_wo_sq;
  pc.norm_v_sq = sp.norm_v_sq;
  pc.sigma_eta_sq = noise.sigma_eta_sq(obj.n, obj.r);
  pc.sigma_xi_sq = noise.sigma_xi_sq(obj.n, obj.r);
  pc.c_star = obj.grad_norm_sq_at_optimum();
  return pc;
}

ProblemConstants ProblemConstants::with_spectra(double rho_w,
                                                double rho_wo) const {
  ProblemConstants pc = *this;
  pc.rho_w = rho_w;
  pc.rho_wo = rho_wo;
  pc.norm_wo_sq = n * rho_wo * rho_wo;
  pc.norm_v_sq = static_cast<double>(n) * n * rho_wo * rho_wo;
  return pc;
}

LinearSystem lemma1_system(const ProblemConstants& pc, const Schedule& sched,
                           int k) {
  sched.check();
  const double mu = pc.mu, L = pc.ell;
  if (!(sched.alpha * sched.gamma_at(0) < 2.0 / (mu + L)))
    throw HypothesisViolated("error recursion: requires alpha*gamma_0 < 2/(mu+L)");

  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double half = (1.0 + pc.rho_w * pc.rho_w) / 2.0;
  const double d2 = pc.d_i_sq;
  const double gk = sched.gamma_at(k);
  const double gk1 = sched.gamma_at(k + 1);
  const double at = sched.alpha * gk;    // effective stepsize at k
  const double at1 = sched.alpha * gk1;  // and at k+1
  const double dg = gk - gk1;

  // Constant list; a12 and a32 carry the effective stepsize and are
  // evaluated per iteration.
  const double a12 = L * L / (mu * pc.n) * (1.0 + at * mu);
  const double a23 = (1.0 + pc.rho_w * pc.rho_w) / t_w;
  const double a31 = 32.0 * pc.n * std::pow(L, 4) * d2 / t_w;
  const double a32 = 32.0 * d2 * (L * L + at * at * std::pow(L, 4)) / t_w;
  const double a33 = 16.0 * L * L * d2 / t_w;
  const double a34 = 16.0 * pc.n * L * L * d2 / t_w;
  const double a35 = 16.0 * L * L * d2 / t_w;

  LinearSystem sys;
  sys.a << 1.0 - at * mu, at * a12, 0.0,
           0.0, half, sched.alpha * sched.alpha * a23,
           gk1 * gk1 * at * at * a31 + dg * dg * a34,
           gk1 * gk1 * a32 + dg * dg * a35,
           half + at1 * at1 * a33;

  const double bk = sched.beta_at(k);
  const double b1 = (sched.alpha * sched.alpha * pc.norm_v_sq * pc.sigma_eta_sq +
                     pc.norm_v_sq * pc.sigma_xi_sq) /
                    (static_cast<double>(pc.n) * pc.n);
  const double b2 = d2 * pc.norm_wo_sq * pc.sigma_xi_sq;
  const double b31 =
      4.0 * d2 * pc.sigma_eta_sq / t_w *
          (4.0 * at1 * at1 * L * L * pc.norm_v_sq / pc.n +
           (1.0 + at1 * L) * pc.norm_wo_sq) +
      4.0 * gk1 * gk1 * L * L * d2 / t_w * pc.norm_wo_sq * pc.sigma_xi_sq;
  const double b32 = 8.0 * d2 * pc.c_star / t_w;
  sys.b << bk * bk * b1, bk * bk * b2, bk * bk * b31 + dg * dg * b32;
  return sys;
}

BoundSequence propagate_bound(const ProblemConstants& pc,
                              const Schedule& sched, double u0, double x0,
                              double y0, int horizon) {
  if (u0 < 0 || x0 < 0 || y0 < 0)
    throw OutOfRange("propagate: initial bounds must be nonnegative");
  if (horizon < 0) throw OutOfRange("propagate: horizon must be >= 0");
  BoundSequence seq;
  seq.values.reserve(horizon + 1);
  Eigen::Vector3d v(u0, x0, y0);
  seq.values.push_back(v);
  for (int k = 0; k < horizon; ++k) {
    const LinearSystem sys = lemma1_system(pc, sched, k);
    v = sys.a * v + sys.b;
    if (v.maxCoeff() > 1e300) seq.diverged = true;
    seq.values.push_back(v);
  }
  return seq;
}

namespace {

double min3(double a, double b, double c) { return std::min(a, std::min(b, c)); }

// sqrt(2 d3 / (d2 + sqrt(d2^2 + 4 d1 d3))), the positive root of
// d1 x^2 + d2 x - d3 = 0 in x = alpha^2.
double quartic_root_bound(double d1, double d2, double d3) {
  return std::sqrt(2.0 * d3 / (d2 + std::sqrt(d2 * d2 + 4.0 * d1 * d3)));
}

}  // namespace

double c41_const(const ProblemConstants& pc) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  return 64.0 * (1.0 + pc.rho_w * pc.rho_w) * (3.0 * pc.mu + pc.ell) *
         std::pow(pc.ell, 6) * pc.d_i_sq /
         (std::pow(t_w, 4) * (pc.mu + pc.ell));
}

double c42_thm1(const ProblemConstants& pc) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  return 64.0 * (1.0 + pc.rho_w * pc.rho_w) *
         (pc.mu + pc.ell + 2.0 * pc.ell * pc.ell) * pc.ell * pc.ell *
         pc.d_i_sq / (std::pow(t_w, 4) * (pc.mu + pc.ell));
}

double c42_cor1(const ProblemConstants& pc) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  return 64.0 * (1.0 + pc.rho_w * pc.rho_w) *
         (pc.mu * pc.mu + 2.0 * pc.mu * pc.ell + 5.0 * pc.ell * pc.ell) *
         pc.ell * pc.ell * pc.d_i_sq /
         (std::pow(t_w, 4) * (pc.mu + pc.ell) * (pc.mu + pc.ell));
}

namespace {

// min of the three flat-schedule arms with a caller-chosen c42 variant;
// reports which arm binds.
double flat_schedule_bound(const ProblemConstants& pc, double c42,
                           std::string* binding) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double arm1 = 2.0 / (pc.mu + pc.ell);
  const double arm2 =
      t_w / (4.0 * std::sqrt(2.0) * pc.ell * std::sqrt(pc.d_i_sq));
  const double c41 = c41_const(pc);
  const double arm3 =
      std::sqrt(2.0 / (c42 + std::sqrt(c42 * c42 + 4.0 * c41)));
  const double bound = min3(arm1, arm2, arm3);
  if (binding) {
    *binding = bound == arm1   ? "2/(mu+L)"
               : bound == arm2 ? "(1-rho_w^2)/(4*sqrt2*L*d_I)"
                               : "quartic arm";
  }
  return bound;
}

}  // namespace

StepsizeCheck thm1_stepsize_check(const ProblemConstants& pc, double p,
                                  double q, double alpha, double gamma) {
  if (p < 0 || q < 0) throw OutOfRange("stepsize check: p, q must be >= 0");
  StepsizeCheck out;
  const double ag = alpha * gamma;
  const double two_over = 2.0 / (pc.mu + pc.ell);

  if (p == 0 && q > 0) {
    out.case_id = 1;
    out.bound = flat_schedule_bound(pc, c42_thm1(pc), &out.binding);
    out.satisfied = ag < out.bound;
    out.opt_exponent = out.cons_exponent = out.track_exponent = 2.0 * q;
    // gamma_0 = gamma/m^p = gamma: the recursion hypothesis is a direct check.
    out.feasible_with_lemma1 = ag < two_over;
    out.min_m = 0;
    return out;
  }
  if (p > 0 && p <= 1 && q > p) {
    out.case_id = 2;
    out.bound = std::min(2.0 * q - p, 2.0 * p) / pc.mu;
    out.satisfied = ag > out.bound;
    out.binding = "alpha*gamma > min{2q-p,2p}/mu";
    out.opt_exponent = std::min(2.0 * q - p, 2.0 * p);
    out.cons_exponent = out.track_exponent = 2.0 * std::min(q, p);
    // alpha gamma / m^p < 2/(mu+L) holds for every m above min_m.
    out.min_m = ag > two_over ? std::pow(ag / two_over, 1.0 / p) : 0.0;
    out.feasible_with_lemma1 = true;
    return out;
  }
  if (p > 1 && q >= p / 2.0) {
    out.case_id = 3;
    out.satisfied = true;
    out.binding = "q >= p/2 (rate constants require a large enough m)";
    out.bound = 0;
    out.opt_exponent = p;
    out.opt_has_constant_floor = true;
    out.cons_exponent = out.track_exponent = 2.0 * std::min(q, p);
    out.min_m = ag > two_over ? std::pow(ag / two_over, 1.0 / p) : 0.0;
    out.feasible_with_lemma1 = true;
    return out;
  }
  std::ostringstream msg;
  msg << "no decay regime covers p=" << p << ", q=" << q;
  throw NoCaseMatches(msg.str());
}

double cor1_stepsize_bound(const ProblemConstants& pc) {
  return flat_schedule_bound(pc, c42_cor1(pc), nullptr);
}

double prior_stepsize_bound(const ProblemConstants& pc,
                            const WeightMatrix& wm) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double mu = pc.mu, L = pc.ell, d2 = pc.d_i_sq;
  const double w_minus_i = norm_w_minus_i_sq(wm);
  const double d1 = 48.0 * d2 * d2 * std::pow(L, 6) / (mu * t_w * t_w);
  const double dd2 = 24.0 * d2 * d2 * L * L *
                         (2.0 * L * L + mu * mu * pc.n) * (w_minus_i + 2.0) /
                         (mu * t_w * t_w) +
                     10.0 * std::pow(L, 4) * d2 / mu;
  const double d3 = mu * pc.n * t_w * t_w / 18.0;
  return min3(1.0 / (mu + L),
              t_w / (4.0 * std::sqrt(3.0) * L * std::sqrt(d2)),
              quartic_root_bound(d1, dd2, d3));
}

double spectral_radius3(const Eigen::Matrix3d& a) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BoundSystem thm3_system(const ProblemConstants& pc, double alpha) {
  const double mu = pc.mu, L = pc.ell;
  if (!(alpha > 0)) throw OutOfRange("constant-stepsize system: alpha must be positive");
  if (!(alpha < 1.0 / (mu + L)))
    throw HypothesisViolated("constant-stepsize system: requires alpha < 1/(mu+L)");
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double half = (1.0 + pc.rho_w * pc.rho_w) / 2.0;
  const double d2 = pc.d_i_sq;
  const double n = pc.n;

  BoundSystem bs;
  bs.a << 1.0 - alpha * mu, 2.0 * alpha * L * L / (mu * n), 0.0,
          0.0, half, 2.0 * alpha * alpha / t_w,
          32.0 * n * alpha * alpha * std::pow(L, 4) * d2 / t_w,
          64.0 * d2 * L * L / t_w,
          half + 16.0 * alpha * alpha * L * L * d2 / t_w;
  bs.b << alpha * alpha * pc.sigma_eta_sq + pc.sigma_xi_sq,
          n * d2 * pc.sigma_xi_sq,
          24.0 * n * d2 * pc.sigma_eta_sq / t_w +
              4.0 * n * L * L * d2 * pc.sigma_xi_sq / t_w;
  bs.b *= pc.rho_wo * pc.rho_wo;
  bs.rho_a = spectral_radius3(bs.a);
  return bs;
}

double thm3_stepsize_bound(const ProblemConstants& pc) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double mu = pc.mu, L = pc.ell, d2 = pc.d_i_sq;
  const double d1 = 128.0 * std::pow(L, 6) * d2 / (mu * t_w * t_w);
  const double dd2 =
      8.0 * mu * L * L * d2 + 128.0 * mu * d2 * L * L / (t_w * t_w);
  const double d3 = mu * t_w * t_w / 4.0;
  return min3(1.0 / (mu + L),
              t_w / (4.0 * std::sqrt(2.0) * std::sqrt(d2) * L),
              quartic_root_bound(d1, dd2, d3));
}

double thm4_stepsize_bound(const ProblemConstants& pc) {
  const double t_w = 1.0 - pc.rho_w * pc.rho_w;
  const double mu = pc.mu, L = pc.ell, d2 = pc.d_i_sq;
  const double d1 = 128.0 * std::pow(L, 6) * d2 / (mu * t_w * t_w);
  const double dd2 =
      8.0 * mu * L * L * d2 + 128.0 * mu * d2 * L * L / (t_w * t_w);
  const double d3 = mu * t_w * t_w / 4.0;
  return min3(1.0 / (mu + L), t_w / (8.0 * std::sqrt(d2) * L),
              quartic_root_bound(d1, dd2, d3));
}

SteadyState steady_state_error(const BoundSystem& bs, int n) {
  if (!(bs.rho_a < 1.0))
    throw NotContractive("steady state: rho(A) >= 1, no finite fixed point");
  const Eigen::Vector3d x =
      (Eigen::Matrix3d::Identity() - bs.a).partialPivLu().solve(bs.b);
  SteadyState ss;
  ss.theta1 = x(0);
  ss.theta2 = x(1);
  ss.theta = 2.0 * n * ss.theta1 + 2.0 * ss.theta2;
  return ss;
}

std::pair<double, double> closed_form_theta(const ProblemConstants& pc,
                                            double alpha) {
  const double mu = pc.mu, L = pc.ell, d2 = pc.d_i_sq, n = pc.n;
  const double se = pc.sigma_eta_sq, sx = pc.sigma_xi_sq;
  const double tw = 1.0 - pc.rho_w * pc.rho_w;
  const double a = alpha;
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a6 = a4 * a2;
  const double L2 = L * L, L4 = L2 * L2;

  const double n1 = a2 / 4.0 * se + sx / 4.0;
  const double n2 = a * d2 * L2 / mu * sx;
  const double n3 = -8.0 * d2 * a4 * L2 * se - 8.0 * d2 * a2 * L2 * sx;
  const double n4 = -32.0 * a3 * d2 * d2 * L4 / mu * sx;
  const double n5 = (96.0 * a3 * d2 * L2 / mu - 128.0 * a4 * d2 * L2) * se +
                    (16.0 * a3 * d2 * L4 / mu - 128.0 * a2 * d2 * L2) * sx;
  const double m1 = a * mu / 2.0 * n * d2 * sx;
  const double m2 = 0.0;
  const double m3 = -16.0 * n * a3 * mu * d2 * d2 * L2 * sx;
  const double m4 = (64.0 * n * a6 * d2 * L4 + 48.0 * mu * n * a3 * d2) * se +
                    (64.0 * n * a4 * d2 * L4 + 8.0 * mu * n * a3 * d2 * L2) * sx;
  const double c1 = a * mu / 4.0;
  const double c2 = -8.0 * a3 * mu * d2 * L2;
  const double c3 =
      -128.0 * a4 * a * d2 * L4 * L2 / mu - 128.0 * a3 * mu * d2 * L2;

  const double tw2 = tw * tw, tw3 = tw2 * tw, tw4 = tw2 * tw2;
  const double den = c1 * tw4 + c2 * tw2 + c3;
  const double rho2 = pc.rho_wo * pc.rho_wo;
  const double theta1 =
      (n1 * tw4 + n2 * tw3 + n3 * tw2 + n4 * tw + n5) / den * rho2;
  const double theta2 = (m1 * tw3 + m2 * tw2 + m3 * tw + m4) / den * rho2;
  return {theta1, theta2};
}

std::vector<SweepPoint> monotonicity_probe(
    const ProblemConstants& tmpl, double alpha,
    const std::vector<double>& rho_w_grid,
    const std::vector<double>& rho_wo_grid) {
  if (rho_w_grid.empty() || rho_wo_grid.empty())
    throw OutOfRange("monotonicity probe: empty grid");
  std::vector<SweepPoint> out;
  out.reserve(rho_w_grid.size() * rho_wo_grid.size());
  auto sign_of = [](double d) { return d > 0 ? 1 : (d < 0 ? -1 : 0); };

  for (std::size_t iw = 0; iw < rho_w_grid.size(); ++iw) {
    for (std::size_t io = 0; io < rho_wo_grid.size(); ++io) {
      const ProblemConstants pc =
          tmpl.with_spectra(rho_w_grid[iw], rho_wo_grid[io]);
      if (!(alpha < thm4_stepsize_bound(pc))) {
        std::ostringstream msg;
        msg << "monotonicity probe: alpha=" << alpha
            << " violates the stepsize condition at rho_w=" << pc.rho_w
            << ", rho_wo=" << pc.rho_wo;
        throw StepsizeTooLarge(msg.str());
      }
      SweepPoint pt;
      pt.rho_w = pc.rho_w;
      pt.rho_wo = pc.rho_wo;
      pt.theta = steady_state_error(thm3_system(pc, alpha), pc.n).theta;
      if (iw > 0) {
        const SweepPoint& prev = out[(iw - 1) * rho_wo_grid.size() + io];
        pt.fd_sign_rhow = sign_of(pt.theta - prev.theta);
      }
      if (io > 0) {
        const SweepPoint& prev = out[iw * rho_wo_grid.size() + io - 1];
        pt.fd_sign_rhowo = sign_of(pt.theta - prev.theta);
      }
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace dpgt
