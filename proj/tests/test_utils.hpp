#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpgt/randomness.hpp"
#include "dpgt/topology.hpp"

namespace dpgt::testing {

// Random connected symmetric doubly-stochastic matrix: Metropolis weights on
// a random connected graph, blended with the identity by a random amount to
// vary the diagonal.
inline WeightMatrix make_metropolis(int n, Stream& rng,
                                    double edge_prob = 0.5) {
  for (;;) {
    Matrix adj = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < edge_prob) adj(i, j) = adj(j, i) = 1.0;
    // connectivity
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v)
        if (adj(u, v) > 0 && !seen[v]) {
          seen[v] = 1;
          ++reached;
          stack.push_back(v);
        }
    }
    if (reached != n) continue;

    Vector deg = adj.rowwise().sum();
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        if (i != j && adj(i, j) > 0)
          w(i, j) = 1.0 / (1.0 + std::max(deg(i), deg(j)));
      w(i, i) = 1.0 - w.row(i).sum();
    }
    const double theta = rng.uniform(0.0, 0.5);
    w = theta * Matrix::Identity(n, n) + (1.0 - theta) * w;
    return WeightMatrix::validate(w);
  }
}

struct LinFit {
  double slope = 0, intercept = 0, r2 = 0;
};

inline LinFit linfit(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LinFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (int i = 0; i < n; ++i) {
    const double resid = ys[i] - f.intercept - f.slope * xs[i];
    rss += resid * resid;
  }
  f.r2 = syy > 0 ? 1.0 - rss / syy : 1.0;
  return f;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const LinFit f = linfit(a, b);
  double va = 0, vb = 0, ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double cov = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cov += (a[i] - ma) * (b[i] - mb);
  }
  (void)f;
  return cov / std::sqrt(va * vb);
}

// Kolmogorov-Smirnov statistic of samples against a cdf.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double laplace_cdf(double x, double b) {
  return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
}

}  // namespace dpgt::testing
