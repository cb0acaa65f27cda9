// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/linalg.hpp"

#include <algorithm>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {

Matrix SolveSymmetric(const Matrix& a, double ridge, const Matrix& rhs) {
  Matrix shifted = a;
  shifted.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() == Eigen::Success) {
    Matrix x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(shifted);
  return cod.solve(rhs);
}

double NormalEquationResidual(const Matrix& a, double ridge, const Matrix& x,
                              const Matrix& rhs) {
  Matrix lhs = a * x + ridge * x;
  return (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
}

void RequireFinite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NumericError("non-finite values in " + std::string(what));
  }
}

}  // namespace tagstream
