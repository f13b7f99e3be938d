#include "tmscat/block_operator.hpp"

#include <limits>

#include "tmscat/errors.hpp"

namespace tmscat {

BlockOperator::BlockOperator(CMatrix dense) : m_(std::move(dense)), n_(m_.rows() / 2) {
  if (m_.rows() != m_.cols() || m_.rows() % 2 != 0) {
    throw ConfigError("BlockOperator requires a square matrix of even dimension");
  }
}

BlockOperator::BlockOperator(const CMatrix& b11, const CMatrix& b12, const CMatrix& b21,
                             const CMatrix& b22)
    : BlockOperator(b11.rows()) {
  const Eigen::Index n = b11.rows();
  for (const CMatrix* b : {&b11, &b12, &b21, &b22}) {
    if (b->rows() != n || b->cols() != n) throw ConfigError("BlockOperator blocks must share dimension");
  }
  block(0, 0) = b11;
  block(0, 1) = b12;
  block(1, 0) = b21;
  block(1, 1) = b22;
}

BlockOperator BlockOperator::identity(Eigen::Index n) {
  BlockOperator op(n);
  op.m_.setIdentity();
  return op;
}

double relative_difference(const CMatrix& a, const CMatrix& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

}  // namespace tmscat
