// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/semantics.hpp"

#include <algorithm>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {

TagChunk TagChunk::FromPairs(Index rows, Index cols,
                             const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw ShapeError("tag entry (" + std::to_string(r) + "," + std::to_string(c) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    triplets.emplace_back(r, c, 1.0);
  }
  TagChunk out(rows, cols);
  // Duplicates must collapse, not sum.
  out.y_.setFromTriplets(triplets.begin(), triplets.end(),
                         [](double, double) { return 1.0; });
  out.y_.makeCompressed();
  return out;
}

TagChunk TagChunk::FromDense(const Matrix& dense) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) pairs.emplace_back(i, j);
    }
  }
  return FromPairs(dense.rows(), dense.cols(), pairs);
}

Index TagChunk::TagCount(Index row) const {
  return y_.outerIndexPtr()[row + 1] - y_.outerIndexPtr()[row];
}

std::vector<Index> TagChunk::TagsOf(Index row) const {
  std::vector<Index> out;
  for (SparseRowMatrix::InnerIterator it(y_, row); it; ++it) out.push_back(it.col());
  return out;
}

Index SemanticChunk::InvalidCount() const {
  return static_cast<Index>(std::count(valid.begin(), valid.end(), false));
}

SemanticChunk PoolSemantics(const TagChunk& tags, const EmbeddingTable& table) {
  if (tags.cols() != table.tags()) {
    throw ShapeError("tag chunk has " + std::to_string(tags.cols()) +
                     " columns but the embedding table holds " +
                     std::to_string(table.tags()) + " tags");
  }
  SemanticChunk out;
  out.z = Matrix::Zero(tags.rows(), table.dim());
  out.valid.assign(static_cast<std::size_t>(tags.rows()), false);
  const SparseRowMatrix& y = tags.sparse();
  for (Index i = 0; i < y.outerSize(); ++i) {
    Index k = 0;
    for (SparseRowMatrix::InnerIterator it(y, i); it; ++it) {
      out.z.row(i) += table.vectors.row(it.col());
      ++k;
    }
    if (k > 0) {
      out.z.row(i) /= static_cast<double>(k);
      out.valid[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

}  // namespace tagstream
