#pragma once

#include <cstdint>

#include "dpgt/errors.hpp"

namespace dpgt {

// splitmix64 finalizer; the building block of the counter-based streams.
std::uint64_t mix64(std::uint64_t z);

// A counter-based random stream: every draw is a pure function of the root
// seed plus the tags/counters supplied at the call site, so draws can be
// evaluated in any order, replayed exactly, and partitioned across workers
// without shared state. Sub-streams derived from distinct tags are
// statistically independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(mix64(seed)) {}

  // New stream whose draws are independent of this one.
  Rng derive(std::uint64_t tag) const { return Rng(Derived{}, mix64(root_ ^ tag)); }

  // Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t counter) const;
  // Uniform keyed by a (k, i, j) triple; used for per-(iteration, agent,
  // coordinate) noise so agents can be evaluated in any order.
  double uniform_at3(std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

  // Laplace(b) by inverse CDF: u ~ U(-1/2, 1/2), x = -b sign(u) ln(1-2|u|).
  // Zero mean, variance 2 b^2.
  double laplace_at(double b, std::uint64_t counter) const;
  double laplace_at3(double b, std::uint64_t k, std::uint64_t i,
                     std::uint64_t j) const;

  // Normal(0, sd) by Box-Muller; consumes counters 2c and 2c+1.
  double normal_at(double sd, std::uint64_t counter) const;

  std::uint64_t root() const { return root_; }

 private:
  struct Derived {};
  Rng(Derived, std::uint64_t mixed) : root_(mixed) {}
  std::uint64_t root_;
};

// Stateful cursor over an Rng for sequential sampling (instance generation,
// statistical tests). Each call advances an internal counter.
class Stream {
 public:
  explicit Stream(Rng rng) : rng_(rng) {}
  double uniform() { return rng_.uniform_at(next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double laplace(double b) { return rng_.laplace_at(b, next_++); }
  double normal(double sd) { return rng_.normal_at(sd, next_++); }

 private:
  Rng rng_;
  std::uint64_t next_ = 0;
};

// One Laplace(b) draw from a stream. b > 0.
double laplace_sample(double b, Stream& stream);

// Time-varying stepsize and noise-attenuation schedules
//   gamma_k = gamma / (m+k)^p,   beta_k = 1 / (m+k)^q,
// with fixed outer stepsize alpha.
struct Schedule {
  double alpha = 0;  // > 0
  double gamma = 0;  // > 0
  double p = 0;      // >= 0
  double q = 0;      // >= 0
  double m = 1;      // > 0

  double gamma_at(int k) const;
  double beta_at(int k) const;
  // alpha * gamma_at(k), the effective stepsize.
  double alpha_tilde_at(int k) const { return alpha * gamma_at(k); }
  // Throws OutOfRange if any field violates its range.
  void check() const;
};

// Laplace scales for the two injected-noise channels (tracker and decision),
// with the tight i.i.d. matrix-variance proxies sigma^2 = 2 n r b^2 used by
// the error-bound formulas.
struct NoiseParams {
  double b_eta = 0;
  double b_xi = 0;

  static NoiseParams from_scales(double b_eta, double b_xi);
  // Inverts sigma^2 = 2 n r b^2 per channel; accepts zero for noise-free runs.
  static NoiseParams from_matrix_variance(double sigma_eta_sq,
                                          double sigma_xi_sq, int n, int r);

  double sigma_eta_sq(int n, int r) const { return 2.0 * n * r * b_eta * b_eta; }
  double sigma_xi_sq(int n, int r) const { return 2.0 * n * r * b_xi * b_xi; }
};

}  // namespace dpgt
