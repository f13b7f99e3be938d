#pragma once

#include <memory>

#include "tmscat/block_operator.hpp"
#include "tmscat/grid.hpp"
#include "tmscat/hamiltonian.hpp"
#include "tmscat/potential.hpp"

namespace tmscat {

enum class StepMethod { rk4_fixed, dopri5 };

/// How evanescent channels are closed when restricting to the propagating disk.
/// `decaying` imposes the bounded-solution conditions (no growing evanescent
/// wave enters from either side); `none` takes the plain submatrix of U.
enum class EvanescentClosure { decaying, none };

struct StepperOptions {
  StepMethod method = StepMethod::rk4_fixed;
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step = 0.25;
  /// Upper bound on max(Im varpi) * window length.
  double growth_budget = 40.0;
  EvanescentClosure closure = EvanescentClosure::decaying;
  /// Scales the fixed RK4 step.
  double safety = 1.0;
  /// RK4 only: compare each slab against a half-resolution pass and bisect it until the
  /// estimated error is below rtol * ||U - I|| + atol; max_refinements bounds the depth.
  bool richardson_check = true;
  int max_refinements = 16;

  void validate() const;
};

struct IntegratorReport {
  double x_min = 0.0;
  double x_max = 0.0;
  int slabs = 0;
  long steps = 0;
  long rejected = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  /// Largest sampled infinity norm of the slab generator.
  double generator_norm = 0.0;
  /// max(Im varpi) * window length.
  double growth_exponent = 0.0;
  /// Largest per-slab Richardson error estimate relative to the slab norm.
  double error_estimate = 0.0;
  double rtol = 0.0;
  double seconds = 0.0;
};

/// Blocks of the fundamental transfer matrix on the propagating disk.
struct TransferMatrix {
  CMatrix m11, m12, m21, m22;
  std::shared_ptr<const MomentumGrid> grid;
  double k = 0.0;
  IntegratorReport report;

  Eigen::Index size() const { return m11.rows(); }
  CMatrix dense() const;
  static TransferMatrix identity(std::shared_ptr<const MomentumGrid> grid, double k);
};

struct TransferResult {
  /// U(x_max, x_min) on the full grid.
  BlockOperator full_u;
  TransferMatrix transfer;
};

/// Integrates i dU/dx = H(x) U from x_from to x_to on the full grid.
TransferResult evolve(const EffectiveHamiltonian& h, double x_from, double x_to, const StepperOptions& opts);

/// Integrates across the potential's support window.
TransferResult integrate_transfer(const PotentialModel& v, std::shared_ptr<const MomentumGrid> grid, double k,
                                  const StepperOptions& opts);
TransferResult integrate_transfer(const PotentialModel& v, const ScatteringConfig& cfg, const StepperOptions& opts);

/// 2x2 transfer matrix of an x-only potential.
Eigen::Matrix2cd transfer_1d(const PotentialModel& v, double k, const StepperOptions& opts);

/// Scattering-matrix form [[A_out_R], [B_out_L]] = S [[A_in_L], [B_in_R]] of a block evolution operator.
BlockOperator transfer_to_s(const BlockOperator& u);
/// Redheffer star product: `left` acts first along x, then `right`.
BlockOperator star_product(const BlockOperator& left, const BlockOperator& right);

}  // namespace tmscat
