#include "tmscat/hamiltonian.hpp"

#include <cmath>

#include "tmscat/errors.hpp"

namespace tmscat {

FourierSlice fourier_slice(const PotentialModel& v, const MomentumGrid& grid, double x) {
  FourierSlice s;
  s.x = x;
  s.d = grid.dim();
  s.points_per_axis = grid.points_per_axis();
  if (s.d == 0) {
    s.values = {v.transverse_fourier(x, PVec{}, 0)};
    return s;
  }
  const int c = s.points_per_axis - 1;
  const int span = s.span();
  const double cell = grid.weight(0);
  if (s.d == 1) {
    s.values.resize(static_cast<std::size_t>(span));
    for (int dy = -c; dy <= c; ++dy) {
      s.values[static_cast<std::size_t>(dy + c)] = v.transverse_fourier(x, grid.difference_momentum(dy, 0), 1, cell);
    }
  } else {
    s.values.resize(static_cast<std::size_t>(span) * static_cast<std::size_t>(span));
    for (int dy = -c; dy <= c; ++dy) {
      for (int dz = -c; dz <= c; ++dz) {
        s.values[static_cast<std::size_t>((dy + c) * span + (dz + c))] =
            v.transverse_fourier(x, grid.difference_momentum(dy, dz), 2, cell);
      }
    }
  }
  return s;
}

CMatrix assemble_V(const PotentialModel& v, const MomentumGrid& grid, double x) {
  const int n = grid.size();
  CMatrix out = CMatrix::Zero(n, n);
  if (v.is_zero()) return out;
  const FourierSlice s = fourier_slice(v, grid, x);
  const double norm = 1.0 / std::pow(2.0 * kPi, grid.dim());
  for (int j = 0; j < n; ++j) {
    const auto aj = grid.axis_index(j);
    const double wj = grid.weight(j) * norm;
    for (int i = 0; i < n; ++i) {
      const auto ai = grid.axis_index(i);
      out(i, j) = s.at(ai[0] - aj[0], ai[1] - aj[1]) * wj;
    }
  }
  return out;
}

BlockOperator assemble_H(const PotentialModel& v, const MomentumGrid& grid, double k, double x) {
  auto g = std::make_shared<const MomentumGrid>(grid);
  return EffectiveHamiltonian(v, std::move(g), k).at(x);
}

Eigen::Matrix2cd assemble_H_1d(const PotentialModel& v, double k, double x) {
  const cplx c = v.value_1d(x) / (2.0 * k);
  const cplx e = std::polar(1.0, 2.0 * k * x);
  Eigen::Matrix2cd h;
  h << c, c * std::conj(e), -c * e, -c;
  return h;
}

EffectiveHamiltonian::EffectiveHamiltonian(PotentialModel v, std::shared_ptr<const MomentumGrid> grid, double k)
    : v_(std::move(v)), grid_(std::move(grid)), k_(k) {
  if (!grid_) throw ConfigError("EffectiveHamiltonian needs a grid");
  if (auto req = v_.required_dimension(); req && *req != grid_->dim()) {
    throw ConfigError("potential dimension does not match the grid");
  }
  varpi_ = diag_varpi_family(*grid_, k_);
  inv_varpi_ = varpi_.full.cwiseInverse();
}

CMatrix EffectiveHamiltonian::potential_matrix(double x) const { return assemble_V(v_, *grid_, x); }

BlockOperator EffectiveHamiltonian::interaction_from(const CMatrix& vmat, double x) const {
  const Eigen::Index n = size();
  BlockOperator h(n);
  if (v_.is_zero()) return h;
  CVector ph(n);
  for (Eigen::Index i = 0; i < n; ++i) ph(i) = std::polar(1.0, x * varpi_.real(i));
  const CVector phc = ph.conjugate();
  // W = V varpi^-1; blocks are D^-1 W D, D^-1 W D^-1, -D W D, -D W D^-1 (times 1/2).
  const CMatrix w = vmat * inv_varpi_.asDiagonal();
  const CVector half_phc = 0.5 * phc;
  const CVector half_ph = 0.5 * ph;
  h.block(0, 0) = half_phc.asDiagonal() * w * ph.asDiagonal();
  h.block(0, 1) = half_phc.asDiagonal() * w * phc.asDiagonal();
  h.block(1, 0) = -(half_ph.asDiagonal() * w * ph.asDiagonal());
  h.block(1, 1) = -(half_ph.asDiagonal() * w * phc.asDiagonal());
  return h;
}

BlockOperator EffectiveHamiltonian::interaction(double x) const {
  return interaction_from(potential_matrix(x), x);
}

BlockOperator EffectiveHamiltonian::at(double x) const {
  BlockOperator h = interaction(x);
  const Eigen::Index n = size();
  for (Eigen::Index i = 0; i < n; ++i) {
    h.dense()(i, i) -= cplx{0.0, varpi_.imag(i)};
    h.dense()(n + i, n + i) += cplx{0.0, varpi_.imag(i)};
  }
  return h;
}

double EffectiveHamiltonian::interaction_norm_inf(double x) const {
  if (v_.is_zero()) return 0.0;
  const CMatrix vmat = potential_matrix(x);
  const RVector inv_abs = inv_varpi_.cwiseAbs();
  // Every block row holds two copies of |W| / 2 up to unimodular phases.
  return (vmat.cwiseAbs() * inv_abs).maxCoeff();
}

}  // namespace tmscat
