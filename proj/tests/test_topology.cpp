#include <doctest.h>

#include <cmath>

#include "dpgt/topology.hpp"
#include "test_utils.hpp"

using namespace dpgt;

TEST_SUITE_BEGIN("topology");

TEST_CASE("averaging matrix validates with rho_w = 0") {
  const WeightMatrix wm = make_averaging_weights(4);
  const SpectralProfile sp = spectral_profile(wm);
  CHECK(sp.rho_w == doctest::Approx(0.0).epsilon(1e-12));
  // W_o has zero diagonal and 1/4 off-diagonal; eigenvalues {3/4, -1/4 x3}.
  CHECK(sp.rho_wo == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(sp.d_i_sq == doctest::Approx(3.0));
}

TEST_CASE("identity matrix is rejected as disconnected") {
  CHECK_THROWS_AS(WeightMatrix::validate(Matrix::Identity(4, 4)), Disconnected);
}

TEST_CASE("each validation failure is named") {
  Matrix w = Matrix::Constant(3, 3, 1.0 / 3);

  Matrix neg = w;
  neg(0, 1) = neg(1, 0) = -0.1;  // negativity is checked before the sums
  CHECK_THROWS_AS(WeightMatrix::validate(neg), NegativeEntry);

  Matrix asym = w;
  asym(0, 1) += 1e-6;
  CHECK_THROWS_AS(WeightMatrix::validate(asym), NotSymmetric);

  Matrix bad_sum = w;
  bad_sum(0, 0) += 1e-6;
  CHECK_THROWS_AS(WeightMatrix::validate(bad_sum), NotDoublyStochastic);

  Matrix zero_diag(2, 2);
  zero_diag << 0, 1, 1, 0;
  CHECK_THROWS_AS(WeightMatrix::validate(zero_diag), NonPositiveDiagonal);

  CHECK_THROWS_AS(WeightMatrix::validate(Matrix::Constant(1, 1, 1.0)),
                  OutOfRange);
}

TEST_CASE("n=2 uniform pair") {
  Matrix w(2, 2);
  w << 0.5, 0.5, 0.5, 0.5;
  const SpectralProfile sp = spectral_profile(WeightMatrix::validate(w));
  CHECK(sp.rho_w == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sp.rho_wo == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ring generator hits the advertised spectra") {
  SUBCASE("r=0.3, d=0.5") {
    const SpectralProfile sp = spectral_profile(make_ring_weights(0.3, 0.5));
    CHECK(sp.rho_wo == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(sp.rho_w == doctest::Approx(0.85).epsilon(1e-13));
    CHECK(sp.d_i_sq == doctest::Approx(3.0));
  }
  SUBCASE("r=0.5, d=0.2") {
    const SpectralProfile sp = spectral_profile(make_ring_weights(0.5, 0.2));
    CHECK(sp.rho_w == doctest::Approx(0.6).epsilon(1e-13));
  }
  SUBCASE("row sums are 1 and entries alternate") {
    const WeightMatrix wm = make_ring_weights(0.41, 0.77);
    for (int i = 0; i < 4; ++i) {
      CHECK(wm.w().row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(wm.w()(i, i) == doctest::Approx(1.0 - 0.41));
    }
  }
  SUBCASE("identity grid") {
    for (int ir = 1; ir <= 10; ++ir) {
      for (int id = 1; id <= 10; ++id) {
        const double r = 0.05 * ir;  // up to 0.5
        const double d = id / 11.0;
        const SpectralProfile sp = spectral_profile(make_ring_weights(r, d));
        CHECK(std::fabs(sp.rho_wo - r) < 1e-12);
        CHECK(std::fabs(sp.rho_w - (1.0 - r * (1.0 - d))) < 1e-12);
      }
    }
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(make_ring_weights(0.6, 0.5), OutOfRange);
    CHECK_THROWS_AS(make_ring_weights(0.0, 0.5), OutOfRange);
    CHECK_THROWS_AS(make_ring_weights(0.3, 0.0), OutOfRange);
    CHECK_THROWS_AS(make_ring_weights(0.3, 1.0), OutOfRange);
  }
}

TEST_CASE("consensus contraction property") {
  Stream rng(Rng{2024});
  const WeightMatrix wms[] = {make_ring_weights(0.3, 0.5),
                              make_averaging_weights(5),
                              testing::make_metropolis(6, rng)};
  for (const auto& wm : wms) {
    const int n = wm.n();
    const SpectralProfile sp = spectral_profile(wm);
    const Vector ones = Vector::Ones(n);
    for (int trial = 0; trial < 1000; ++trial) {
      Vector z(n);
      for (int i = 0; i < n; ++i) z(i) = rng.uniform(-5.0, 5.0);
      const Vector centered = z - ones * (z.mean());
      const Vector wz = wm.w() * z;
      const Vector wc = wz - ones * wz.mean();
      CHECK(wc.norm() <= sp.rho_w * centered.norm() + 1e-12);
    }
  }
}

TEST_CASE("power iteration agrees with the eigendecomposition") {
  Stream rng(Rng{77});
  for (int trial = 0; trial < 20; ++trial) {
    const WeightMatrix wm = testing::make_metropolis(3 + trial % 6, rng);
    const int n = wm.n();
    const SpectralProfile sp = spectral_profile(wm);
    const Matrix centered = wm.w() - Matrix::Constant(n, n, 1.0 / n);
    CHECK(power_iteration_rho(centered) ==
          doctest::Approx(sp.rho_w).epsilon(1e-9));
  }
}

TEST_CASE("norm relations used by the constant-stepsize bounds") {
  Stream rng(Rng{5150});
  for (int trial = 0; trial < 50; ++trial) {
    const WeightMatrix wm = testing::make_metropolis(3 + trial % 6, rng);
    const SpectralProfile sp = spectral_profile(wm);
    const int n = wm.n();
    CHECK(sp.norm_wo_sq <= n * sp.rho_wo * sp.rho_wo + 1e-12);
    CHECK(sp.norm_v_sq <= double(n) * n * sp.rho_wo * sp.rho_wo + 1e-12);
    CHECK(sp.rho_w < 1.0);
  }
}

TEST_CASE("connectivity ignores sub-tolerance entries") {
  // Edges at 1e-16 are below the support tolerance: graph is two pairs.
  Matrix w(4, 4);
  const double eps = 1e-16;
  w << 0.5 - eps, 0.5, eps, 0,
       0.5, 0.5 - eps, 0, eps,
       eps, 0, 0.5 - eps, 0.5,
       0, eps, 0.5, 0.5 - eps;
  CHECK_THROWS_AS(WeightMatrix::validate(w), Disconnected);
}

TEST_SUITE_END();
