#include <algorithm>
#include <set>

#include <gtest/gtest.h>
#include <tmscat/tmscat.hpp>

using namespace tmscat;

TEST(Grid, OneDimensionalCaseIsSinglePoint) {
  ScatteringConfig cfg;
  cfg.d = 0;
  cfg.k = 1.7;
  const auto g = build_grid(cfg);
  ASSERT_EQ(g.size(), 1);
  EXPECT_EQ(g.weight(0), 1.0);
  ASSERT_EQ(g.propagating_size(), 1);
  EXPECT_EQ(g.propagating()[0], 0);
  EXPECT_EQ(g.parity()[0], 0);
}

TEST(Grid, StaggeredLatticeEnumeration) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 1.0;
  cfg.p_max = 2.0;
  cfg.n_per_axis = 8;
  const auto g = build_grid(cfg);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  std::multiset<double> got;
  for (const auto& p : g.points()) got.insert(p.y);
  std::multiset<double> want;
  for (int j = 1; j <= 4; ++j) {
    want.insert((2 * j - 1) * 0.25);
    want.insert(-(2 * j - 1) * 0.25);
  }
  EXPECT_EQ(got, want);
  std::multiset<double> prop;
  for (int i : g.propagating()) prop.insert(g.point(i).y);
  EXPECT_EQ(prop, (std::multiset<double>{-0.75, -0.25, 0.25, 0.75}));
  for (double w : g.weights()) EXPECT_DOUBLE_EQ(w, 0.5);
}

TEST(Grid, ParityIsAnInvolution) {
  for (int d : {1, 2}) {
    ScatteringConfig cfg;
    cfg.d = d;
    cfg.n_per_axis = 12;
    const auto g = build_grid(cfg);
    for (int i = 0; i < g.size(); ++i) {
      const int j = g.parity()[static_cast<std::size_t>(i)];
      EXPECT_EQ(g.parity()[static_cast<std::size_t>(j)], i);
      EXPECT_EQ(g.point(j), -g.point(i));
    }
  }
}

TEST(Grid, PropagatingSetMatchesDisk) {
  ScatteringConfig cfg;
  cfg.d = 2;
  cfg.k = 1.3;
  cfg.n_per_axis = 12;
  const auto g = build_grid(cfg);
  int count = 0;
  for (int i = 0; i < g.size(); ++i) {
    const bool inside = g.point(i).norm() < cfg.k;
    EXPECT_EQ(g.is_propagating(i), inside);
    count += inside;
  }
  EXPECT_EQ(count, g.propagating_size());
}

TEST(Grid, ResonantLatticeIsRejected) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 0.75;
  cfg.p_max = 2.0;
  cfg.n_per_axis = 8;  // points at +-0.75 sit on |p| = k
  EXPECT_THROW(build_grid(cfg), GridResonanceError);
}

TEST(Grid, InvalidConfigurationThrows) {
  ScatteringConfig cfg;
  cfg.k = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.d = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.n_per_axis = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Grid, NearestPropagatingPoint) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 1.0;
  cfg.p_max = 2.0;
  cfg.n_per_axis = 8;
  const auto g = build_grid(cfg);
  const auto [idx, dist] = g.nearest_propagating(PVec{0.3, 0.0});
  EXPECT_DOUBLE_EQ(g.point(idx).y, 0.25);
  EXPECT_NEAR(dist, 0.05, 1e-15);
}

TEST(Varpi, Branches) {
  EXPECT_EQ(varpi(0.0, 1.0), cplx(1.0, 0.0));
  const cplx real_branch = varpi(0.36, 1.0);
  EXPECT_NEAR(real_branch.real(), 0.8, 1e-15);
  EXPECT_EQ(real_branch.imag(), 0.0);
  const cplx evanescent = varpi(1.5625, 1.0);
  EXPECT_EQ(evanescent.real(), 0.0);
  EXPECT_NEAR(evanescent.imag(), 0.75, 1e-15);
}

TEST(Varpi, FamilySplitsIntoRealAndImaginaryParts) {
  ScatteringConfig cfg;
  cfg.d = 1;
  cfg.k = 1.0;
  cfg.p_max = 2.0;
  cfg.n_per_axis = 8;
  const auto g = build_grid(cfg);
  const auto fam = diag_varpi_family(g, 1.0);
  for (int i = 0; i < g.size(); ++i) {
    if (g.is_propagating(i)) {
      EXPECT_EQ(fam.imag(i), 0.0);
      EXPECT_GT(fam.real(i), 0.0);
    } else {
      EXPECT_EQ(fam.real(i), 0.0);
    }
    EXPECT_EQ(fam.real(i) + cplx(0.0, 1.0) * fam.imag(i), fam.full(i));
    if (std::abs(std::abs(g.point(i).y) - 1.25) < 1e-12) EXPECT_NEAR(fam.imag(i), 0.75, 1e-15);
  }
}
