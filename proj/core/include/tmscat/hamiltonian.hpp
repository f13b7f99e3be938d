#pragma once

#include <memory>
#include <vector>

#include "tmscat/block_operator.hpp"
#include "tmscat/grid.hpp"
#include "tmscat/potential.hpp"

namespace tmscat {

/// Transverse transform of v at one x, sampled on the lattice of grid
/// differences p_i - p_j. Offsets run over [-(na-1), na-1] per axis.
struct FourierSlice {
  double x = 0.0;
  int d = 0;
  int points_per_axis = 1;
  std::vector<cplx> values;

  int span() const { return 2 * points_per_axis - 1; }
  cplx at(int dy, int dz) const {
    const int c = points_per_axis - 1;
    if (d == 0) return values[0];
    if (d == 1) return values[static_cast<std::size_t>(dy + c)];
    return values[static_cast<std::size_t>((dy + c) * span() + (dz + c))];
  }
};

FourierSlice fourier_slice(const PotentialModel& v, const MomentumGrid& grid, double x);

/// V[i, j] = v~(x, p_i - p_j) w_j / (2 pi)^d.
CMatrix assemble_V(const PotentialModel& v, const MomentumGrid& grid, double x);

/// Effective Hamiltonian on the full grid:
/// (1/2) E(-x) [V varpi^-1 (x) K] E(x) - i varpi_i sigma_3, K = [[1, 1], [-1, -1]].
BlockOperator assemble_H(const PotentialModel& v, const MomentumGrid& grid, double k, double x);

/// (v(x) / 2k) [[1, e^{-2ikx}], [-e^{2ikx}, -1]].
Eigen::Matrix2cd assemble_H_1d(const PotentialModel& v, double k, double x);

/// Evaluates H(x) for a fixed (potential, grid, k), caching the varpi factors.
class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(PotentialModel v, std::shared_ptr<const MomentumGrid> grid, double k);

  const PotentialModel& potential() const { return v_; }
  const MomentumGrid& grid() const { return *grid_; }
  std::shared_ptr<const MomentumGrid> grid_ptr() const { return grid_; }
  double k() const { return k_; }
  const VarpiFamily& varpi() const { return varpi_; }
  Eigen::Index size() const { return grid_->size(); }

  CMatrix potential_matrix(double x) const;
  /// Interaction part only (the term proportional to V).
  BlockOperator interaction(double x) const;
  /// Interaction part plus the diagonal -i varpi_i sigma_3.
  BlockOperator at(double x) const;
  /// Infinity norm of interaction(x), computed from V without assembling it.
  double interaction_norm_inf(double x) const;

 private:
  BlockOperator interaction_from(const CMatrix& vmat, double x) const;

  PotentialModel v_;
  std::shared_ptr<const MomentumGrid> grid_;
  double k_;
  VarpiFamily varpi_;
  CVector inv_varpi_;
};

}  // namespace tmscat
