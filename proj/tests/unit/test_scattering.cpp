#include <cmath>
#include <memory>

#include <gtest/gtest.h>
#include <tmscat/tmscat.hpp>

using namespace tmscat;

namespace {

ScatteringConfig config(int d, int n, double k = 1.0) {
  ScatteringConfig c;
  c.d = d;
  c.k = k;
  c.n_per_axis = n;
  return c;
}

StepperOptions tight(double rtol = 1e-10) {
  StepperOptions o;
  o.rtol = rtol;
  return o;
}

}  // namespace

TEST(Scattering, ZeroPotentialHasNoScattering) {
  const auto r = integrate_transfer(PotentialModel::zero(), config(1, 12), StepperOptions{});
  const AmplitudeExtractor ex(r.transfer);
  const auto& g = ex.grid();
  for (int i : g.propagating()) {
    for (int j : g.propagating()) {
      for (int s0 : {1, -1}) {
        for (int s : {1, -1}) {
          EXPECT_EQ(ex.amplitude(Direction::on_grid(g, i, s0), Direction::on_grid(g, j, s)), cplx{});
        }
      }
    }
  }
  const BlockOperator s = ex.s_matrix();
  EXPECT_EQ((s.dense() - CMatrix::Identity(s.dense().rows(), s.dense().cols())).norm(), 0.0);
  const auto a = g.propagating_position(g.propagating()[0]);
  const RTAmplitudes tl = ex.rt_at(a, 1, a, 1);
  EXPECT_EQ(tl.t_left->smooth, cplx{});
  EXPECT_NE(tl.t_left->singular, cplx{});
  EXPECT_EQ(*ex.rt_at(a, 1, a, -1).r_left, cplx{});
}

TEST(Scattering, OneDimensionalReflectionAndTransmission) {
  const double k = 1.4;
  const auto v = random_gaussian_mixture(9, 3, 0.4, 0);
  const auto r = integrate_transfer(v, config(0, 1, k), tight());
  const auto& m = r.transfer;
  const AmplitudeExtractor ex(m);
  const Direction px{1.0, {}}, mx{-1.0, {}};
  const cplx m21 = m.m21(0, 0), m22 = m.m22(0, 0), m12 = m.m12(0, 0);
  const RTAmplitudes left = ex.rt(px, mx);
  EXPECT_NEAR(std::abs(*left.r_left - (-m21 / m22)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(ex.amplitude(px, mx) * c_d(0, k) / k - *left.r_left), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(*ex.rt(mx, px).r_right - m12 / m22), 0.0, 1e-14);
  const cplx tl = ex.rt(px, px).t_left->total();
  const cplx tr = ex.rt(mx, mx).t_right->total();
  EXPECT_NEAR(std::abs(tl - 1.0 / m22), 0.0, 1e-9);
  EXPECT_LT(std::abs(tl - tr), 1e-9);

  const BlockOperator s = ex.s_matrix();
  EXPECT_NEAR(std::abs(s.dense()(0, 0) - tl), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s.dense()(0, 1) - *ex.rt(mx, px).r_right), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.dense()(1, 0) - *left.r_left), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.dense()(1, 1) - tr), 0.0, 1e-12);
}

TEST(Scattering, SPrimeIsRowSwap) {
  const auto r = integrate_transfer(random_gaussian_mixture(2, 2, 0.3, 1), config(1, 8), tight(1e-8));
  const BlockOperator s = assemble_S(r.transfer);
  const BlockOperator sp = assemble_S_prime(r.transfer);
  EXPECT_EQ(sp.block(0, 0), s.block(1, 0));
  EXPECT_EQ(sp.block(0, 1), s.block(1, 1));
  EXPECT_EQ(sp.block(1, 0), s.block(0, 0));
  EXPECT_EQ(sp.block(1, 1), s.block(0, 1));
  EXPECT_EQ(s_prime_from_s(s).dense(), sp.dense());
}

TEST(Scattering, DualTransmissionFormulas) {
  const auto r = integrate_transfer(random_gaussian_mixture(21, 3, 0.4, 1), config(1, 12), tight());
  const AmplitudeExtractor ex(r.transfer);
  const int n = static_cast<int>(r.transfer.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const RTAmplitudes rt = ex.rt_at(a, 1, b, 1);
      const cplx t = rt.t_left->total();
      EXPECT_LT(std::abs(t - *rt.t_left_alt), 1e-8 * std::max(1.0, std::abs(t)));
    }
  }
}

TEST(Scattering, WeakWellAgreesWithPartialWaves) {
  const double depth = 0.05;
  const auto r = integrate_transfer(circular_well(-depth, 1.0), config(1, 32), tight(1e-8));
  const AmplitudeExtractor ex(r.transfer);
  const auto pw = partial_wave_circular_well(-depth, 1.0, 1.0, 12);
  const auto& g = ex.grid();
  const Direction inc = Direction::on_grid(g, g.nearest_propagating(PVec{}).first, 1);
  double num = 0.0, den = 0.0;
  for (int i : g.propagating()) {
    for (int s : {1, -1}) {
      const Direction out = Direction::on_grid(g, i, s);
      const double theta = std::atan2(out.perp.y, out.nx) - std::atan2(inc.perp.y, inc.nx);
      const cplx f = ex.amplitude(inc, out), fo = pw.amplitude(theta);
      num += std::norm(f - fo);
      den += std::norm(fo);
    }
  }
  EXPECT_LT(std::sqrt(num / den), 0.02);
}

TEST(Scattering, SnappingAndValidation) {
  const auto g = build_grid(config(1, 16));
  const Direction n = Direction::from_angle(0.3);
  const SnappedDirection sn = snap_direction(g, n);
  EXPECT_LE(sn.snap_distance, 0.5 * g.spacing() + 1e-15);
  EXPECT_EQ(sn.sign, 1);
  EXPECT_NEAR(std::abs(g.point(sn.index).y - std::sin(0.3)), sn.snap_distance, 1e-15);
  EXPECT_THROW(Direction::from_angle(kPi / 2.0).validate(1), ConfigError);
  EXPECT_THROW((Direction{0.5, PVec{0.5, 0.0}}.validate(1)), ConfigError);
  const Direction grid_dir = Direction::on_grid(g, g.propagating()[0], -1);
  EXPECT_EQ(snap_direction(g, grid_dir).snap_distance, 0.0);
  EXPECT_EQ(snap_direction(g, grid_dir).sign, -1);
}

TEST(Scattering, OnGridPairsAreDeterministic) {
  const auto g = build_grid(config(1, 16));
  const auto a = on_grid_pairs(g, 10, 5), b = on_grid_pairs(g, 10, 5);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first.perp, b[i].first.perp);
    EXPECT_EQ(a[i].second.nx, b[i].second.nx);
  }
  const std::size_t np = static_cast<std::size_t>(g.propagating_size());
  EXPECT_EQ(on_grid_pairs(g, 0, 5).size(), 4 * np * np);
}

TEST(Scattering, ZeroPotentialHasUnitSpectrum) {
  ScanOptions scan;
  scan.k_min = 0.5;
  scan.k_max = 3.0;
  scan.samples = 12;
  const auto res = spectral_singularity_scan(PotentialModel::zero(), config(0, 1), scan, StepperOptions{});
  for (const auto& s : res.samples) EXPECT_EQ(s.sigma_min, 1.0);
  for (const auto& m : res.minima) EXPECT_FALSE(m.below_threshold);
}

TEST(Scattering, RealBarrierHasNoSpectralSingularity) {
  ScanOptions scan;
  scan.k_min = 0.5;
  scan.k_max = 3.0;
  scan.samples = 60;
  const auto v = rectangular_barrier(1.0, 0.0, 2.0);
  const auto res = spectral_singularity_scan(v, config(0, 1), scan, StepperOptions{});
  for (const auto& s : res.samples) {
    const double oracle = std::abs(match_piecewise_1d({Segment{0.0, 2.0, 1.0}}, s.k).m(1, 1));
    EXPECT_NEAR(s.sigma_min, oracle, 1e-6);
    EXPECT_GT(s.sigma_min, 1e-3);
  }
  for (const auto& m : res.minima) EXPECT_FALSE(m.below_threshold);
}

TEST(Scattering, TransparencyChecks) {
  const auto zero = integrate_transfer(PotentialModel::zero(), config(1, 12), StepperOptions{});
  const auto& g = *zero.transfer.grid;
  for (int i : g.propagating()) {
    for (int s : {1, -1}) {
      const auto c = transparency_reflectionless_check(zero.transfer, Direction::on_grid(g, i, s));
      EXPECT_TRUE(c.transparent && c.reflectionless);
      EXPECT_EQ(c.transparency_residual, 0.0);
      EXPECT_EQ(c.reflection_residual, 0.0);
    }
  }
  const auto generic = integrate_transfer(random_gaussian_mixture(7, 3, 0.3, 1), config(1, 12), tight(1e-8));
  const auto c = transparency_reflectionless_check(generic.transfer, Direction::from_angle(0.1));
  EXPECT_GT(c.transparency_residual, 1e-3);
  EXPECT_GT(c.reflection_residual, 1e-3);
  EXPECT_FALSE(c.transparent || c.reflectionless);
}

TEST(Scattering, VanishingOffDiagonalBlocksAreOmnidirectionallyReflectionless) {
  auto m = integrate_transfer(random_gaussian_mixture(7, 3, 0.3, 1), config(1, 12), tight(1e-8)).transfer;
  m.m12.setZero();
  m.m21.setZero();
  const auto& g = *m.grid;
  const AmplitudeExtractor ex(m);
  for (int i : g.propagating()) {
    for (int s : {1, -1}) {
      EXPECT_TRUE(transparency_reflectionless_check(m, Direction::on_grid(g, i, s)).reflectionless);
    }
  }
  EXPECT_EQ(ex.kernels().pm.norm(), 0.0);
  EXPECT_EQ(ex.kernels().mp.norm(), 0.0);
}

TEST(Scattering, NearSingularTransferIsRejected) {
  auto m = TransferMatrix::identity(std::make_shared<const MomentumGrid>(build_grid(config(0, 1))), 1.0);
  m.m22(0, 0) = 1e-14;
  EXPECT_THROW(AmplitudeExtractor{m}, NearSingularError);
}
