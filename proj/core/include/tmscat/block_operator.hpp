#pragma once

#include "tmscat/grid.hpp"

namespace tmscat {

/// 2x2 block of N x N complex matrices acting on two-component grid functions
/// (A, B). Stored densely as a 2N x 2N matrix so products stay single GEMMs.
class BlockOperator {
 public:
  BlockOperator() = default;
  explicit BlockOperator(Eigen::Index n) : m_(CMatrix::Zero(2 * n, 2 * n)), n_(n) {}
  explicit BlockOperator(CMatrix dense);
  BlockOperator(const CMatrix& b11, const CMatrix& b12, const CMatrix& b21, const CMatrix& b22);

  static BlockOperator identity(Eigen::Index n);

  Eigen::Index n() const { return n_; }

  /// Block (r, c) with r, c in {0, 1}.
  auto block(int r, int c) { return m_.block(r * n_, c * n_, n_, n_); }
  auto block(int r, int c) const { return m_.block(r * n_, c * n_, n_, n_); }

  const CMatrix& dense() const { return m_; }
  CMatrix& dense() { return m_; }

  BlockOperator operator*(const BlockOperator& o) const { return BlockOperator(CMatrix(m_ * o.m_)); }

 private:
  CMatrix m_;
  Eigen::Index n_ = 0;
};

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
double relative_difference(const CMatrix& a, const CMatrix& b);

}  // namespace tmscat
