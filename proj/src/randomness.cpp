#include "dpgt/randomness.hpp"

#include <cmath>

namespace dpgt {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// 53-bit mantissa mapped into the open interval (0, 1).
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double laplace_from_unit(double b, double u01) {
  const double u = u01 - 0.5;  // in (-1/2, 1/2)
  const double sign = u < 0 ? -1.0 : 1.0;
  return -b * sign * std::log(1.0 - 2.0 * std::fabs(u));
}

}  // namespace

double Rng::uniform_at(std::uint64_t counter) const {
  return to_open_unit(mix64(root_ ^ counter));
}

double Rng::uniform_at3(std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) const {
  return to_open_unit(mix64(mix64(mix64(root_ ^ a) ^ b) ^ c));
}

double Rng::laplace_at(double b, std::uint64_t counter) const {
  return laplace_from_unit(b, uniform_at(counter));
}

double Rng::laplace_at3(double b, std::uint64_t k, std::uint64_t i,
                        std::uint64_t j) const {
  return laplace_from_unit(b, uniform_at3(k, i, j));
}

double Rng::normal_at(double sd, std::uint64_t counter) const {
  const double u1 = uniform_at(2 * counter);
  const double u2 = uniform_at(2 * counter + 1);
  return sd * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * M_PI * u2);
}

double laplace_sample(double b, Stream& stream) {
  if (b <= 0) throw OutOfRange("laplace_sample: scale must be positive");
  return stream.laplace(b);
}

double Schedule::gamma_at(int k) const { return gamma / std::pow(m + k, p); }

double Schedule::beta_at(int k) const { return 1.0 / std::pow(m + k, q); }

void Schedule::check() const {
  if (!(alpha > 0)) throw OutOfRange("schedule: alpha must be positive");
  if (!(gamma > 0)) throw OutOfRange("schedule: gamma must be positive");
  if (!(p >= 0)) throw OutOfRange("schedule: p must be nonnegative");
  if (!(q >= 0)) throw OutOfRange("schedule: q must be nonnegative");
  if (!(m > 0)) throw OutOfRange("schedule: m must be positive");
}

NoiseParams NoiseParams::from_scales(double b_eta, double b_xi) {
  if (b_eta < 0 || b_xi < 0)
    throw OutOfRange("noise: Laplace scales must be nonnegative");
  return NoiseParams{b_eta, b_xi};
}

NoiseParams NoiseParams::from_matrix_variance(double sigma_eta_sq,
                                              double sigma_xi_sq, int n,
                                              int r) {
  if (sigma_eta_sq < 0 || sigma_xi_sq < 0)
    throw OutOfRange("noise: variances must be nonnegative");
  if (n < 1 || r < 1) throw OutOfRange("noise: n and r must be positive");
  const double denom = 2.0 * n * r;
  return NoiseParams{std::sqrt(sigma_eta_sq / denom),
                     std::sqrt(sigma_xi_sq / denom)};
}

}  // namespace dpgt
