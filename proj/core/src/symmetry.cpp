#include <cmath>
#include "tmscat/symmetry.hpp"

#include <algorithm>
#include <limits>

#include "tmscat/errors.hpp"

namespace tmscat {
namespace {

double rel(const CMatrix& lhs, const CMatrix& rhs) {
  const double denom = std::max(lhs.norm(), std::numeric_limits<double>::min());
  return (lhs - rhs).norm() / denom;
}

ResidualRecord record(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual < tol};
}

CMatrix block2(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  CMatrix m(a.rows() + c.rows(), a.cols() + b.cols());
  m << a, b, c, d;
  return m;
}

// Omega (x) G and its inverse for an invertible grid factor G.
std::pair<CMatrix, CMatrix> omega_form(const CMatrix& g, const CMatrix& g_inv) {
  const CMatrix z = CMatrix::Zero(g.rows(), g.cols());
  return {block2(z, g, -g, z), block2(z, -g_inv, g_inv, z)};
}

CMatrix full_parity(const MomentumGrid& grid) {
  const int n = grid.size();
  CMatrix p = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(grid.parity()[static_cast<std::size_t>(i)], i) = 1.0;
  return p;
}

}  // namespace

CMatrix SymmetryOperators::omega() const {
  const CMatrix id = CMatrix::Identity(n, n), z = CMatrix::Zero(n, n);
  return block2(z, id, -id, z);
}

CMatrix SymmetryOperators::sigma1() const {
  const CMatrix id = CMatrix::Identity(n, n), z = CMatrix::Zero(n, n);
  return block2(z, id, id, z);
}

CMatrix SymmetryOperators::scale_by_ratio(const CMatrix& b, bool inverse) const {
  // Entry-wise ratios keep the diagonal exact: w_i / w_i is one, w_i * (1 / w_i) need not be.
  CMatrix out(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) out(i, j) = b(i, j) * (inverse ? w(j) / w(i) : w(i) / w(j));
  }
  return out;
}

CMatrix SymmetryOperators::similarity(const CMatrix& b) const { return P * scale_by_ratio(b, false) * P; }

CMatrix SymmetryOperators::frak_t_conjugate(const CMatrix& l) const {
  return scale_by_ratio(P * l.conjugate() * P, true);
}

SymmetryOperators build_symmetry(const MomentumGrid& grid, double k) {
  SymmetryOperators ops;
  const auto& prop = grid.propagating();
  ops.n = static_cast<Eigen::Index>(prop.size());
  ops.P = CMatrix::Zero(ops.n, ops.n);
  ops.w.resize(ops.n);
  for (Eigen::Index a = 0; a < ops.n; ++a) {
    const int i = prop[static_cast<std::size_t>(a)];
    const int pa = grid.propagating_position(grid.parity()[static_cast<std::size_t>(i)]);
    if (pa < 0) throw ConfigError("propagating set is not closed under parity");
    ops.P(pa, a) = 1.0;
    ops.w(a) = varpi(grid.point(i), k).real();
  }
  ops.w_inv = ops.w.cwiseInverse();
  if ((ops.P * ops.P - CMatrix::Identity(ops.n, ops.n)).norm() != 0.0) {
    throw ConfigError("parity map is not an involution");
  }
  if ((ops.P * ops.W() - ops.W() * ops.P).norm() != 0.0) {
    throw ConfigError("parity does not commute with varpi on this grid");
  }
  return ops;
}

double reference_tolerance(double rtol, double cond_m22) { return std::max(1e-6, 50.0 * rtol * cond_m22); }

ResidualRecord check_M_anti_pseudo_unitarity(const TransferMatrix& m, const SymmetryOperators& ops, double tol) {
  // A^-1 M^T A M with A = Omega (x) (Winv P), written block by block.
  const CMatrix md = m.dense();
  const CMatrix y = md.transpose();
  const Eigen::Index n = ops.n;
  const CMatrix conj = block2(ops.similarity(y.bottomRightCorner(n, n)), -ops.similarity(y.bottomLeftCorner(n, n)),
                              -ops.similarity(y.topRightCorner(n, n)), ops.similarity(y.topLeftCorner(n, n)));
  const CMatrix lhs = conj * md;
  const double r = (lhs - CMatrix::Identity(md.rows(), md.cols())).norm() / std::max(md.norm(), 1e-300);
  return record("M_anti_pseudo_unitarity", r, tol);
}

std::vector<ResidualRecord> check_entry_identities(const TransferMatrix& m, const SymmetryOperators& ops,
                                                   double tol) {
  const Eigen::PartialPivLU<CMatrix> lu(m.m22);
  const CMatrix m22inv = lu.inverse();
  const CMatrix y = lu.solve(m.m21);
  const CMatrix z = m.m12 * m22inv;
  const CMatrix s11 = m.m11 - m.m12 * y;
  std::vector<ResidualRecord> out;
  out.push_back(record("entry_M22inv_M21", rel(y.adjoint(), ops.frak_t_conjugate(y)), tol));
  out.push_back(record("entry_M12_M22inv", rel(z.adjoint(), ops.frak_t_conjugate(z)), tol));
  out.push_back(record("entry_M22inv_S11", rel(m22inv.adjoint(), ops.frak_t_conjugate(s11)), tol));
  const CMatrix lhs = m.m11 * m.m22 - z * m.m21 * m.m22;
  const CMatrix rhs = ops.similarity(m22inv.transpose()) * m.m22;
  out.push_back(record("entry_det_generalization", rel(lhs, rhs), tol));
  return out;
}

std::vector<ResidualRecord> check_S_identities(const BlockOperator& s, const BlockOperator& s_prime,
                                               const SymmetryOperators& ops, double tol) {
  const Eigen::Index n = ops.n;
  const CMatrix st = s.dense().transpose();
  const CMatrix spt = s_prime.dense().transpose();
  const auto sim = [&](const CMatrix& y, bool swap) {
    const CMatrix a = ops.similarity(y.topLeftCorner(n, n)), b = ops.similarity(y.topRightCorner(n, n));
    const CMatrix c = ops.similarity(y.bottomLeftCorner(n, n)), d = ops.similarity(y.bottomRightCorner(n, n));
    return swap ? block2(d, c, b, a) : block2(a, b, c, d);
  };
  std::vector<ResidualRecord> out;
  out.push_back(record("S_anti_pseudo_hermiticity", rel(s.dense(), sim(st, true)), tol));
  out.push_back(record("S_prime_anti_hermiticity", rel(s_prime.dense(), sim(spt, false)), tol));
  return out;
}

AmplitudeReciprocity check_amplitude_reciprocity(const ScatteringData& data) {
  AmplitudeReciprocity out;
  const auto& par = data.parity;
  const auto f = [&](int a, int s0, int b, int s) {
    return data.amp_scale(a) * data.kernels.select(s0, s)(b, a);
  };
  for (const auto& smp : data.f_samples) {
    const int a = smp.snap0.position, b = smp.snap.position;
    const cplx partner = f(par[static_cast<std::size_t>(b)], -smp.snap.sign, par[static_cast<std::size_t>(a)],
                           -smp.snap0.sign);
    out.sampled_max = std::max(out.sampled_max, std::abs(smp.f - partner));
    out.sampled_max_abs_f = std::max(out.sampled_max_abs_f, std::abs(smp.f));
  }
  const int n = static_cast<int>(par.size());
  for (int a = 0; a < n; ++a) {
    const int pa = par[static_cast<std::size_t>(a)];
    for (int b = 0; b < n; ++b) {
      const int pb = par[static_cast<std::size_t>(b)];
      for (int s0 : {1, -1}) {
        for (int s : {1, -1}) {
          const cplx v = f(a, s0, b, s);
          out.full_max = std::max(out.full_max, std::abs(v - f(pb, -s, pa, -s0)));
          out.full_max_abs_f = std::max(out.full_max_abs_f, std::abs(v));
        }
      }
      out.r_left = std::max(out.r_left, std::abs(data.r_left(b, a) - data.r_left(pa, pb)));
      out.r_right = std::max(out.r_right, std::abs(data.r_right(b, a) - data.r_right(pa, pb)));
      out.t_lr = std::max(out.t_lr, std::abs(data.t_left_smooth(b, a) - data.t_right_smooth(pa, pb)));
    }
  }
  return out;
}

double hamiltonian_residual(const BlockOperator& h, const MomentumGrid& grid, double k) {
  const VarpiFamily fam = diag_varpi_family(grid, k);
  const CMatrix p = full_parity(grid);
  const CMatrix g = fam.full.cwiseInverse().asDiagonal() * p;
  const CMatrix g_inv = p * fam.full.asDiagonal();
  const auto [a, a_inv] = omega_form(g, g_inv);
  const CMatrix& hd = h.dense();
  return (a_inv * hd.transpose() * a + hd).norm() / std::max(hd.norm(), 1e-300);
}

double full_grid_unitarity_residual(const BlockOperator& u, const MomentumGrid& grid, double k) {
  const VarpiFamily fam = diag_varpi_family(grid, k);
  const CMatrix p = full_parity(grid);
  const CMatrix g = fam.full.cwiseInverse().asDiagonal() * p;
  const CMatrix g_inv = p * fam.full.asDiagonal();
  const auto [a, a_inv] = omega_form(g, g_inv);
  const CMatrix& ud = u.dense();
  return (a_inv * ud.transpose() * a * ud - CMatrix::Identity(ud.rows(), ud.cols())).norm() /
         std::max(ud.norm(), 1e-300);
}

std::vector<ResidualRecord> verify_all(const TransferMatrix& m, double rtol) {
  const SymmetryOperators ops = build_symmetry(*m.grid, m.k);
  const Eigen::JacobiSVD<CMatrix> svd(m.m22);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  const double tol = reference_tolerance(rtol, cond);
  std::vector<ResidualRecord> out{check_M_anti_pseudo_unitarity(m, ops, tol)};
  for (auto& r : check_entry_identities(m, ops, tol)) out.push_back(std::move(r));
  const BlockOperator s = assemble_S(m);
  for (auto& r : check_S_identities(s, s_prime_from_s(s), ops, tol)) out.push_back(std::move(r));
  return out;
}

}  // namespace tmscat
