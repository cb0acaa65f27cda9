// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace tagstream {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

// Solves (A + ridge * I) X = rhs for symmetric positive semidefinite A.
// Uses a Cholesky factorization; when the shifted system is not numerically
// positive definite (ridge == 0 with a rank-deficient A) it falls back to the
// minimum-norm least-squares solution.
Matrix SolveSymmetric(const Matrix& a, double ridge, const Matrix& rhs);

// ||(A + ridge I) X - rhs||_F / max(||rhs||_F, tiny)
double NormalEquationResidual(const Matrix& a, double ridge, const Matrix& x,
                              const Matrix& rhs);

// Throws NumericError naming `what` when any entry is NaN or infinite.
void RequireFinite(const Matrix& m, std::string_view what);

}  // namespace tagstream
