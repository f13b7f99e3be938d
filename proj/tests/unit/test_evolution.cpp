#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>
#include <tmscat/tmscat.hpp>

using namespace tmscat;

namespace {

StepperOptions tight(double rtol = 1e-10) {
  StepperOptions o;
  o.rtol = rtol;
  return o;
}

// Transfer matrix of v = g delta(x): the generator is rank one and nilpotent, so the jump is exact.
Eigen::Matrix2cd delta_transfer(double g, double k) {
  const cplx s{0.0, g / (2.0 * k)};
  Eigen::Matrix2cd m;
  m << 1.0 - s, -s, s, 1.0 + s;
  return m;
}

}  // namespace

TEST(Evolution, ZeroPotentialIsIdentity) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.n_per_axis = 8;
  const auto r = integrate_transfer(PotentialModel::zero(), cfg, StepperOptions{});
  const auto& t = r.transfer;
  EXPECT_EQ((t.m11 - CMatrix::Identity(t.size(), t.size())).norm(), 0.0);
  EXPECT_EQ((t.m22 - CMatrix::Identity(t.size(), t.size())).norm(), 0.0);
  EXPECT_EQ(t.m12.norm(), 0.0);
  EXPECT_EQ(t.m21.norm(), 0.0);
  EXPECT_EQ(transfer_1d(PotentialModel::zero(), 1.0, StepperOptions{}), Eigen::Matrix2cd::Identity());
}

TEST(Evolution, BarrierMatchesPlaneWaveMatching) {
  const auto v = rectangular_barrier(1.0, 0.0, 2.0);
  const Eigen::Matrix2cd m = transfer_1d(v, 2.0, tight());
  const auto oracle = match_piecewise_1d({Segment{0.0, 2.0, 1.0}}, 2.0);
  EXPECT_LT((m - oracle.m).norm() / oracle.m.norm(), 1e-9);
}

TEST(Evolution, AdaptiveStepperAlsoMatches) {
  const auto v = rectangular_barrier(cplx{0.8, 0.3}, -0.5, 1.0);
  StepperOptions o = tight();
  o.method = StepMethod::dopri5;
  const Eigen::Matrix2cd m = transfer_1d(v, 1.4, o);
  const auto oracle = match_piecewise_1d({Segment{-0.5, 1.0, cplx{0.8, 0.3}}}, 1.4);
  EXPECT_LT((m - oracle.m).norm() / oracle.m.norm(), 1e-8);
}

TEST(Evolution, DeterminantIsOne) {
  for (unsigned long seed : {1ul, 2ul, 3ul}) {
    const auto v = random_gaussian_mixture(seed, 3, 0.5, 0);
    const double rtol = 1e-9;
    const Eigen::Matrix2cd m = transfer_1d(v, 1.2, tight(rtol));
    EXPECT_LT(std::abs(m.determinant() - 1.0), 10.0 * rtol) << "seed " << seed;
  }
}

TEST(Evolution, NarrowBarrierApproachesDelta) {
  const double g = 0.5, k = 1.5;
  const Eigen::Matrix2cd target = delta_transfer(g, k);
  double previous = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto v = rectangular_barrier(g / eps, -eps / 2.0, eps / 2.0);
    const double err = (transfer_1d(v, k, tight()) - target).norm();
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 2e-3);
}

TEST(Evolution, CompositionOnDisjointSupports) {
  const auto va = gaussian_1d(cplx{0.3, 0.1}, -2.0, 0.3);
  const auto vb = sech2_1d(cplx{-0.2, 0.05}, 2.0, 0.3);
  const PotentialModel vab = va + vb;
  const double rtol = 1e-10;
  for (int d : {0, 1}) {
    ScatteringConfig c;
    c.d = d;
    c.k = 1.0;
    c.n_per_axis = 12;
    const auto ra = integrate_transfer(va, c, tight(rtol));
    const auto rb = integrate_transfer(vb, c, tight(rtol));
    const auto rab = integrate_transfer(vab, c, tight(rtol));
    const CMatrix prod = rb.transfer.dense() * ra.transfer.dense();
    EXPECT_LT((prod - rab.transfer.dense()).norm() / rab.transfer.dense().norm(), 10.0 * rtol) << "d=" << d;
  }
}

TEST(Evolution, StarProductComposesScatteringForms) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 0.2);
  auto random_u = [&](Eigen::Index n) {
    CMatrix m = CMatrix::Identity(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      for (Eigen::Index j = 0; j < 2 * n; ++j) m(i, j) += cplx(nd(rng), nd(rng));
    }
    return BlockOperator(m);
  };
  const Eigen::Index n = 5;
  const BlockOperator ua = random_u(n), ub = random_u(n);
  const BlockOperator combined = star_product(transfer_to_s(ua), transfer_to_s(ub));
  const BlockOperator direct = transfer_to_s(ub * ua);
  EXPECT_LT(relative_difference(combined.dense(), direct.dense()), 1e-12);
}

TEST(Evolution, ReportIsFilled) {
  ScatteringConfig c;
  c.d = 1;
  c.n_per_axis = 8;
  const auto v = gaussian(0.2, 0.8, 0.9);
  const auto r = integrate_transfer(v, c, tight(1e-8));
  const auto& rep = r.transfer.report;
  EXPECT_GT(rep.steps, 0);
  EXPECT_GT(rep.slabs, 0);
  EXPECT_LT(rep.x_min, rep.x_max);
  EXPECT_EQ(rep.rtol, 1e-8);
  EXPECT_LT(rep.error_estimate, 1e-6);
}

TEST(Evolution, RichardsonCheckRefinesEdges) {
  // The disk's transverse transform has square-root edges; the a priori step misses them.
  ScatteringConfig c;
  c.d = 1;
  c.n_per_axis = 16;
  const auto v = circular_well(-0.1, 1.0);
  StepperOptions with = tight(1e-8), without = tight(1e-8);
  without.richardson_check = false;
  const auto a = integrate_transfer(v, c, with);
  const auto b = integrate_transfer(v, c, without);
  EXPECT_GT(a.transfer.report.steps, b.transfer.report.steps);
}

TEST(Evolution, OptionValidation) {
  StepperOptions o;
  o.rtol = 0.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = {};
  o.max_step = -1.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = {};
  o.max_refinements = -1;
  EXPECT_THROW(o.validate(), ConfigError);
}
