#include <cmath>

#include <gtest/gtest.h>
#include <tmscat/tmscat.hpp>

using namespace tmscat;

TEST(Oracle, EmptyStackIsIdentity) {
  const auto r = match_piecewise_1d({}, 1.3);
  EXPECT_EQ(r.m, Eigen::Matrix2cd::Identity());
  EXPECT_EQ(r.r_left, cplx{});
  EXPECT_EQ(r.r_right, cplx{});
  EXPECT_EQ(r.t_left, cplx(1.0, 0.0));
  EXPECT_EQ(r.t_right, cplx(1.0, 0.0));
}

TEST(Oracle, BarrierMatchingHasUnitDeterminant) {
  const auto r = match_piecewise_1d({Segment{0.0, 2.0, 1.0}}, 2.0);
  EXPECT_LT(std::abs(r.m.determinant() - 1.0), 1e-14);
  // Square barrier with k above the top: q = sqrt(k^2 - v0) = sqrt(3).
  const double k = 2.0, q = std::sqrt(3.0), L = 2.0;
  const cplx i{0.0, 1.0};
  const cplx t = std::exp(-i * k * L) /
                 (std::cos(q * L) - i * (k * k + q * q) / (2.0 * k * q) * std::sin(q * L));
  EXPECT_NEAR(std::abs(r.t_left - t), 0.0, 1e-13);
}

TEST(Oracle, ShootingZeroPotential) {
  const auto r = integrate_schrodinger_1d(PotentialModel::zero(), 1.0, -1.0, 1.0);
  EXPECT_LT((r.m - Eigen::Matrix2cd::Identity()).norm(), 1e-12);
  EXPECT_FALSE(r.flagged);
}

TEST(Oracle, ShootingReciprocityForSmoothBump) {
  const auto v = sech2_1d(cplx{0.6, -0.3}, 0.2, 0.7);
  const auto r = integrate_schrodinger_1d(v, 1.1);
  EXPECT_LT(std::abs(r.t_left - r.t_right), 1e-9);
  EXPECT_LT(r.wronskian_drift, 1e-9);
  EXPECT_FALSE(r.flagged);
}

TEST(Oracle, TwoOraclesAgreeOnBarrier) {
  const auto a = match_piecewise_1d({Segment{0.0, 2.0, 1.0}}, 2.0);
  const auto b = integrate_schrodinger_1d(rectangular_barrier(1.0, 0.0, 2.0), 2.0);
  EXPECT_LT(std::abs(a.r_left - b.r_left), 1e-9);
  EXPECT_LT(std::abs(a.r_right - b.r_right), 1e-9);
  EXPECT_LT(std::abs(a.t_left - b.t_left), 1e-9);
}

TEST(Oracle, PartialWavesOfZeroPotential) {
  const auto pw = partial_wave_2d([](double) { return cplx{}; }, 1.0, 1.0, 6);
  for (const auto& a : pw.a) EXPECT_LT(std::abs(a), 1e-12);
  EXPECT_LT(std::abs(pw.amplitude(0.4)), 1e-12);
}

TEST(Oracle, PartialWavesApproachBornForWeakCoupling) {
  double previous = 1e300;
  for (double depth : {1e-2, 1e-3, 1e-4}) {
    const auto pw = partial_wave_circular_well(-depth, 1.0, 1.0, 12);
    const auto v = circular_well(-depth, 1.0);
    double worst = 0.0;
    for (double theta : {0.0, 0.8, 2.0, kPi}) {
      const cplx born = born_amplitude(v, 1, 1.0, 1.0, PVec{}, std::cos(theta), PVec{std::sin(theta), 0.0});
      worst = std::max(worst, std::abs(pw.amplitude(theta) / born - 1.0));
    }
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(Oracle, PartialWaveTailIsSmall) {
  const auto pw = partial_wave_circular_well(-0.5, 1.0, 1.0, 12);
  EXPECT_LT(pw.tail_bound, 1e-8);
  EXPECT_FALSE(pw.flagged);
  // Optical theorem for a real potential: sigma = sqrt(8 pi / k) Im(e^{-i pi/4} f(0)).
  double sigma = 0.0;
  const int n = 2000;
  for (int j = 0; j < n; ++j) sigma += std::norm(pw.amplitude(2.0 * kPi * (j + 0.5) / n)) * 2.0 * kPi / n;
  const double optical = std::sqrt(8.0 * kPi) * (std::exp(cplx(0.0, -kPi / 4.0)) * pw.amplitude(0.0)).imag();
  EXPECT_NEAR(sigma, optical, 1e-8);
}

TEST(Oracle, BornAmplitudeBasics) {
  EXPECT_EQ(born_amplitude(PotentialModel::zero(), 1, 1.0, 1.0, {}, 0.6, PVec{0.8, 0.0}), cplx{});
  for (int d : {0, 1, 2}) {
    const auto v = d == 0 ? gaussian_1d(cplx{0.2, 0.1}, 0.3, 0.8) : gaussian(cplx{0.2, 0.1}, 0.8, 0.9, 0.3);
    const cplx forward = born_amplitude(v, d, 1.4, 1.0, PVec{}, 1.0, PVec{});
    const cplx total = potential_fourier_total(v, d, 0.0, PVec{});
    EXPECT_NEAR(std::abs(forward / total - cplx(0.0, -1.0) / (2.0 * c_d(d, 1.4))), 0.0, 1e-14);
    const cplx small = born_amplitude(v.scaled(1e-3), d, 1.4, 1.0, PVec{}, -1.0, PVec{});
    const cplx smaller = born_amplitude(v.scaled(1e-4), d, 1.4, 1.0, PVec{}, -1.0, PVec{});
    EXPECT_NEAR(std::abs(small / 1e-3 - smaller / 1e-4), 0.0, 1e-12);
  }
}

TEST(Oracle, ClosedFormTransformsMatchQuadrature) {
  // 2D disk: integrate over the plane with a polar midpoint rule.
  const auto well = circular_well(-0.5, 1.0, 0.2);
  const double q = 1.3;
  cplx acc{};
  const int nr = 400, nt = 400;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = 2.0 * kPi * (j + 0.5) / nt;
      const double x = 0.2 + r * std::cos(t);
      acc += -0.5 * std::exp(cplx(0.0, -q * x)) * r * (1.0 / nr) * (2.0 * kPi / nt);
    }
  }
  EXPECT_NEAR(std::abs(potential_fourier_total(well, 1, q, PVec{}) - acc), 0.0, 1e-5);
}

TEST(Oracle, GainSlabSpectralSingularity) {
  const auto root = find_gain_slab_singularity(2.0, 1.0, 3.0);
  EXPECT_GE(root.k, 1.0);
  EXPECT_LE(root.k, 3.0);
  EXPECT_LT(root.gamma, 0.0);
  EXPECT_LT(std::abs(gain_slab_m22(root.gamma, 2.0, root.k)), 1e-10);
  EXPECT_NEAR(gain_slab_min_k(root.gamma, 2.0, 1.0, 3.0), root.k, 1e-6);
  // Absorbing sign: no zero, |M22| stays at least one.
  for (double k : {1.0, 1.5, 2.0, 2.5, 3.0}) EXPECT_GE(std::abs(gain_slab_m22(-root.gamma, 2.0, k)), 1.0);
}
