#include "dpgt/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dpgt {

void PrivacyQuery::check() const {
  schedule.check();
  if (!(c_grad > 0)) throw OutOfRange("privacy query: c_grad must be positive");
  if (dim < 1) throw OutOfRange("privacy query: dim must be >= 1");
  if (w_diag.size() < 1) throw OutOfRange("privacy query: empty w_diag");
  for (int i = 0; i < w_diag.size(); ++i)
    if (!(w_diag(i) > 0) || !(w_diag(i) < 1))
      throw OutOfRange("privacy query: every w_ii must lie in (0, 1)");
  if (horizon && *horizon < 1)
    throw OutOfRange("privacy query: horizon must be >= 1");
}

double c_coefficient(int k, int t, double w_ii) {
  if (t < 0 || t >= k) throw IndexError("c_coefficient: require 0 <= t < k");
  if (!(w_ii > 0) || !(w_ii < 1))
    throw OutOfRange("c_coefficient: w_ii must lie in (0, 1)");
  return std::pow(w_ii, k - 2 - t) * ((k - t - 1) - (k - t) * w_ii);
}

SensitivityProfile sensitivity_closed_form(int horizon, const Schedule& sched,
                                           double w_ii, double c_grad, int r) {
  if (horizon < 0) throw OutOfRange("sensitivity: horizon must be >= 0");
  const double df = 2.0 * std::sqrt(static_cast<double>(r)) * c_grad;
  SensitivityProfile out;
  out.delta_s.assign(horizon + 1, 0.0);
  out.delta_x.assign(horizon + 1, 0.0);
  for (int k = 1; k <= horizon; ++k) {
    double ds = 0, dx = 0;
    for (int t = 0; t < k; ++t) {
      const double gt = sched.gamma_at(t);
      ds += std::pow(w_ii, k - 1 - t) * gt;
      dx += sched.alpha * std::fabs(c_coefficient(k, t, w_ii)) * gt;
    }
    out.delta_s[k] = df * ds;
    out.delta_x[k] = df * dx;
  }
  return out;
}

SensitivityProfile sensitivity_recursion_oracle(int horizon,
                                                const Schedule& sched,
                                                double w_ii, double c_grad,
                                                int r) {
  if (horizon < 0) throw OutOfRange("sensitivity: horizon must be >= 0");
  const double df = 2.0 * std::sqrt(static_cast<double>(r)) * c_grad;
  SensitivityProfile out;
  out.delta_s.assign(horizon + 1, 0.0);
  out.delta_x.assign(horizon + 1, 0.0);

  // Signed coefficient of the swapped-gradient term at time t inside the
  // state difference at time k, propagated by the literal recursions. The
  // l1 worst case over gradient directions is the sum of magnitudes.
  std::vector<double> s_coef, x_coef;
  for (int k = 0; k < horizon; ++k) {
    const double gk = sched.gamma_at(k);
    for (std::size_t t = 0; t < s_coef.size(); ++t) {
      const double s_old = s_coef[t];
      x_coef[t] = w_ii * x_coef[t] + sched.alpha * (1.0 - w_ii) * s_old;
      s_coef[t] = w_ii * s_old;
    }
    s_coef.push_back(gk);
    x_coef.push_back(-sched.alpha * gk);

    double ds = 0, dx = 0;
    for (std::size_t t = 0; t < s_coef.size(); ++t) {
      ds += std::fabs(s_coef[t]);
      dx += std::fabs(x_coef[t]);
    }
    out.delta_s[k + 1] = df * ds;
    out.delta_x[k + 1] = df * dx;
  }
  return out;
}

namespace {

struct ChannelSums {
  // eps_i = s_sum / b_eta + x_sum / b_xi.
  double s_sum = 0, x_sum = 0;
};

// Double sums of Theorem-style budgets for one agent, scale-free:
//   s_sum = 2 sqrt(r) C sum_k sum_t w^{k-1-t} gamma_t / beta_k
//   x_sum = 2 sqrt(r) C alpha sum_k sum_t |c_{k,t}| gamma_t / beta_k.
// The s inner sum telescopes (S_k = w S_{k-1} + gamma_{k-1}); the x inner
// sum is evaluated directly.
std::vector<ChannelSums> channel_sums_by_horizon(const PrivacyQuery& q,
                                                 double w_ii, int horizon) {
  const double df = 2.0 * std::sqrt(static_cast<double>(q.dim)) * q.c_grad;
  std::vector<ChannelSums> acc(horizon + 1);
  double s_inner = 0;  // sum_t w^{k-1-t} gamma_t
  for (int k = 1; k <= horizon; ++k) {
    const double beta_k = q.schedule.beta_at(k);
    s_inner = w_ii * s_inner + q.schedule.gamma_at(k - 1);
    double x_inner = 0;
    for (int t = 0; t < k; ++t)
      x_inner += std::fabs(c_coefficient(k, t, w_ii)) * q.schedule.gamma_at(t);
    acc[k].s_sum = acc[k - 1].s_sum + df * s_inner / beta_k;
    acc[k].x_sum = acc[k - 1].x_sum + df * q.schedule.alpha * x_inner / beta_k;
  }
  return acc;
}

PrivacyReport report_from_sums(const PrivacyQuery& q,
                               const std::vector<double>& s_sums,
                               const std::vector<double>& x_sums) {
  const int n = static_cast<int>(q.w_diag.size());
  PrivacyReport rep;
  rep.eps_per_agent.resize(n);
  rep.s_channel.resize(n);
  rep.x_channel.resize(n);
  for (int i = 0; i < n; ++i) {
    rep.s_channel(i) = s_sums[i] / q.b_eta;
    rep.x_channel(i) = x_sums[i] / q.b_xi;
    rep.eps_per_agent(i) = rep.s_channel(i) + rep.x_channel(i);
    if (rep.eps_per_agent(i) >= rep.eps) {
      // >= so ties pick the last agent deterministically across platforms.
      rep.eps = rep.eps_per_agent(i);
      rep.worst_agent = i;
    }
  }
  return rep;
}

void check_scales(const PrivacyQuery& q) {
  if (!(q.b_eta > 0) || !(q.b_xi > 0))
    throw OutOfRange("privacy query: Laplace scales must be positive");
}

}  // namespace

PrivacyReport finite_horizon_budget(const PrivacyQuery& q) {
  q.check();
  check_scales(q);
  if (!q.horizon)
    throw OutOfRange("finite_horizon_budget: horizon missing (use the infinite-horizon bound)");
  const int n = static_cast<int>(q.w_diag.size());
  std::vector<double> s_sums(n), x_sums(n);
  for (int i = 0; i < n; ++i) {
    const auto acc = channel_sums_by_horizon(q, q.w_diag(i), *q.horizon);
    s_sums[i] = acc.back().s_sum;
    x_sums[i] = acc.back().x_sum;
  }
  return report_from_sums(q, s_sums, x_sums);
}

std::vector<double> budget_by_horizon(const PrivacyQuery& q, int horizon) {
  q.check();
  check_scales(q);
  if (horizon < 1) throw OutOfRange("budget_by_horizon: horizon must be >= 1");
  const int n = static_cast<int>(q.w_diag.size());
  std::vector<std::vector<ChannelSums>> per_agent;
  per_agent.reserve(n);
  for (int i = 0; i < n; ++i)
    per_agent.push_back(channel_sums_by_horizon(q, q.w_diag(i), horizon));
  std::vector<double> eps(horizon);
  for (int k = 1; k <= horizon; ++k) {
    double worst = 0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, per_agent[i][k].s_sum / q.b_eta +
                                  per_agent[i][k].x_sum / q.b_xi);
    eps[k - 1] = worst;
  }
  return eps;
}

double eulerian_polynomial(int order, double w) {
  if (order < 0) throw OutOfRange("eulerian_polynomial: order must be >= 0");
  if (order == 0) return 1.0;
  // Row `order` of the Eulerian triangle via
  // <n, j> = (j+1) <n-1, j> + (n-j) <n-1, j-1>.
  std::vector<double> row{1.0};
  for (int nn = 2; nn <= order; ++nn) {
    std::vector<double> next(nn, 0.0);
    for (int j = 0; j < nn; ++j) {
      const double left = j < static_cast<int>(row.size()) ? row[j] : 0.0;
      const double right = j >= 1 ? row[j - 1] : 0.0;
      next[j] = (j + 1) * left + (nn - j) * right;
    }
    row = std::move(next);
  }
  double value = 0;
  for (int j = static_cast<int>(row.size()) - 1; j >= 0; --j)
    value = value * w + row[j];
  return value;
}

namespace {

// sum_{k >= start} k^{-s} for s > 1: direct summation until the term drops
// below 1e-15, then a midpoint integral remainder (residual < 1e-12).
double tail_sum(double s, int start) {
  double total = 0;
  int k = start;
  for (;;) {
    const double term = std::pow(static_cast<double>(k), -s);
    total += term;
    if (term < 1e-15 || k > 50'000'000) break;
    ++k;
  }
  total += std::pow(k + 0.5, 1.0 - s) / (s - 1.0);
  return total;
}

}  // namespace

PrivacyReport infinite_horizon_budget(const PrivacyQuery& q) {
  q.check();
  check_scales(q);
  const Schedule& sc = q.schedule;
  if (!(sc.q < sc.p - 2.0))
    throw HypothesisViolated(
        "infinite-horizon budget: requires q < p - 2 (tail series diverges)");

  const double m = sc.m;
  const bool integral_m = std::fabs(m - std::round(m)) < 1e-12;
  const int tail_start =
      integral_m ? static_cast<int>(std::llround(m)) + 1
                 : static_cast<int>(std::ceil(m)) + 1;
  const double t1 = tail_sum(sc.p - sc.q, tail_start);
  const double t2 = tail_sum(sc.p - sc.q - 1.0, tail_start);
  const int ceil_p = static_cast<int>(std::ceil(sc.p));
  const double df = 2.0 * std::sqrt(static_cast<double>(q.dim)) * q.c_grad;

  const int n = static_cast<int>(q.w_diag.size());
  std::vector<double> s_sums(n), x_sums(n);
  for (int i = 0; i < n; ++i) {
    const double w = q.w_diag(i);
    const double front = df * sc.gamma * eulerian_polynomial(ceil_p, w) /
                         (std::pow(m, sc.p) * std::pow(1.0 - w, ceil_p + 1));
    s_sums[i] = front * t1 / std::pow(w, m);
    x_sums[i] = front * sc.alpha * t2 / std::pow(w, m + 1.0);
  }
  PrivacyReport rep = report_from_sums(q, s_sums, x_sums);
  rep.infinite_horizon = true;
  rep.tail_start_ceiled = !integral_m;
  return rep;
}

std::pair<double, double> calibrate_noise(double target_eps, double split,
                                          const PrivacyQuery& q) {
  if (!(target_eps > 0))
    throw OutOfRange("calibrate: target budget must be positive");
  if (!(split > 0) || !(split < 1))
    throw OutOfRange("calibrate: split must lie in (0, 1)");

  // Budgets are linear in (1/b_eta, 1/b_xi), so compute the per-agent
  // channel sums at unit scales, split the target across channels at the
  // per-channel worst agents, then tighten both scales jointly so the
  // worst-case agent lands exactly on the target.
  PrivacyQuery unit = q;
  unit.b_eta = 1.0;
  unit.b_xi = 1.0;
  const PrivacyReport base =
      q.horizon ? finite_horizon_budget(unit) : infinite_horizon_budget(unit);

  const double e_max = base.s_channel.maxCoeff();
  const double f_max = base.x_channel.maxCoeff();
  double inv_eta = split * target_eps / e_max;
  double inv_xi = (1.0 - split) * target_eps / f_max;
  double achieved = 0;
  for (int i = 0; i < base.eps_per_agent.size(); ++i)
    achieved = std::max(achieved, base.s_channel(i) * inv_eta +
                                      base.x_channel(i) * inv_xi);
  const double scale_up = target_eps / achieved;  // >= 1
  inv_eta *= scale_up;
  inv_xi *= scale_up;
  return {1.0 / inv_eta, 1.0 / inv_xi};
}

}  // namespace dpgt
