// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tagstream/error.hpp"

namespace tagstream {

AnchorSet SelectAnchors(const Matrix& first_chunk, Index m, std::uint64_t seed) {
  if (m < 1) throw ConfigError("anchor count must be at least 1");
  if (first_chunk.rows() < m) {
    throw DataError("first chunk has " + std::to_string(first_chunk.rows()) +
                    " rows, fewer than the " + std::to_string(m) +
                    " anchors requested");
  }
  std::vector<Index> rows(static_cast<std::size_t>(first_chunk.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m slots become the sample.
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, first_chunk.rows() - 1);
    std::swap(rows[static_cast<std::size_t>(i)],
              rows[static_cast<std::size_t>(pick(rng))]);
  }
  AnchorSet out;
  out.anchors.resize(m, first_chunk.cols());
  for (Index i = 0; i < m; ++i) {
    out.anchors.row(i) = first_chunk.row(rows[static_cast<std::size_t>(i)]);
  }
  return out;
}

double ComputeKernelWidth(const Matrix& x, const AnchorSet& anchors) {
  if (x.rows() < 1) throw DataError("kernel width needs at least one sample");
  if (anchors.count() < 1) throw StateError("anchor set is empty");
  if (x.cols() != anchors.dim()) {
    throw ShapeError("feature dimension " + std::to_string(x.cols()) +
                     " does not match anchor dimension " +
                     std::to_string(anchors.dim()));
  }
  double total = 0.0;
  for (Index j = 0; j < anchors.count(); ++j) {
    total += (x.rowwise() - anchors.anchors.row(j)).rowwise().norm().sum();
  }
  const double sigma =
      total / (static_cast<double>(x.rows()) * static_cast<double>(anchors.count()));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw NumericError("degenerate kernel: every sample coincides with every anchor");
  }
  return sigma;
}

Matrix RbfMap(const Matrix& x, const AnchorSet& anchors) {
  if (!anchors.finalized()) throw StateError("anchor set is not finalized");
  if (x.cols() != anchors.dim()) {
    throw ShapeError("feature dimension " + std::to_string(x.cols()) +
                     " does not match anchor dimension " +
                     std::to_string(anchors.dim()));
  }
  const double scale = -1.0 / (2.0 * anchors.kernel_width * anchors.kernel_width);
  Matrix phi(x.rows(), anchors.count());
  for (Index j = 0; j < anchors.count(); ++j) {
    phi.col(j) = ((x.rowwise() - anchors.anchors.row(j)).rowwise().squaredNorm() * scale)
                     .array()
                     .exp()
                     .matrix();
  }
  return phi;
}

}  // namespace tagstream
