#pragma once

#include <string>
#include <vector>

#include "tmscat/block_operator.hpp"
#include "tmscat/evolution.hpp"
#include "tmscat/grid.hpp"
#include "tmscat/scattering.hpp"

namespace tmscat {

/// Matrix realizations of parity and varpi on the propagating disk.
struct SymmetryOperators {
  CMatrix P;      ///< parity permutation
  RVector w;      ///< varpi on propagating points (real, positive)
  RVector w_inv;
  Eigen::Index n = 0;

  CMatrix W() const { return w.cast<cplx>().asDiagonal(); }
  CMatrix Winv() const { return w_inv.cast<cplx>().asDiagonal(); }
  /// [[0, I], [-I, 0]]
  CMatrix omega() const;
  /// [[0, I], [I, 0]]
  CMatrix sigma1() const;
  /// B_ij w_i / w_j, or w_j / w_i when `inverse`.
  CMatrix scale_by_ratio(const CMatrix& b, bool inverse) const;
  /// P W B Winv P.
  CMatrix similarity(const CMatrix& b) const;
  /// Linear part of T L T^-1: Winv P conj(L) P W.
  CMatrix frak_t_conjugate(const CMatrix& l) const;
};

/// Throws ConfigError if the propagating set is not closed under parity.
SymmetryOperators build_symmetry(const MomentumGrid& grid, double k);

struct ResidualRecord {
  std::string identity_name;
  double residual = 0.0;
  double reference_tol = 0.0;
  bool pass = false;
};

/// max(1e-6, 50 rtol cond(M22)).
double reference_tolerance(double rtol, double cond_m22);

/// || A^-1 M^T A M - I || / ||M|| with A = Omega (x) (Winv P).
ResidualRecord check_M_anti_pseudo_unitarity(const TransferMatrix& m, const SymmetryOperators& ops, double tol);

/// Residuals of the four entry identities, in the order
/// M22^-1 M21, M12 M22^-1, (M22^-1)^dagger vs S11, and the determinant-like product.
std::vector<ResidualRecord> check_entry_identities(const TransferMatrix& m, const SymmetryOperators& ops,
                                                   double tol);

/// S with B = sigma_1 (x) (Winv P); S' with B' = I (x) (Winv P).
std::vector<ResidualRecord> check_S_identities(const BlockOperator& s, const BlockOperator& s_prime,
                                               const SymmetryOperators& ops, double tol);

struct AmplitudeReciprocity {
  /// max |f(n0, n) - f(-n, -n0)| over the sampled pairs.
  double sampled_max = 0.0;
  double sampled_max_abs_f = 0.0;
  /// Same over every on-grid pair.
  double full_max = 0.0;
  double full_max_abs_f = 0.0;
  double r_left = 0.0;   ///< max |R^l(n0, n) - R^l(-n, -n0)|
  double r_right = 0.0;  ///< max |R^r(n0, n) - R^r(-n, -n0)|
  double t_lr = 0.0;     ///< max |T^l(n0, n) - T^r(-n, -n0)| on smooth parts
};

AmplitudeReciprocity check_amplitude_reciprocity(const ScatteringData& data);

/// Residual of A^-1 H^T A + H = 0 on the full grid with complex varpi.
double hamiltonian_residual(const BlockOperator& h, const MomentumGrid& grid, double k);
/// || A^-1 U^T A U - I || / ||U|| on the full grid.
double full_grid_unitarity_residual(const BlockOperator& u, const MomentumGrid& grid, double k);

/// Convenience: every operator-level record for one transfer matrix.
std::vector<ResidualRecord> verify_all(const TransferMatrix& m, double rtol);

}  // namespace tmscat
