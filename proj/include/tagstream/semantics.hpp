// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tagstream/linalg.hpp"

namespace tagstream {

/// Binary tag incidence for one chunk: rows are images, columns are tags.
/// Stored sparse; every stored value is 1.
class TagChunk {
 public:
  TagChunk() = default;
  TagChunk(Index rows, Index cols) : y_(rows, cols) {}

  /// Builds from (row, tag) pairs; duplicates collapse to a single 1.
  static TagChunk FromPairs(Index rows, Index cols,
                            const std::vector<std::pair<Index, Index>>& pairs);
  /// Any nonzero entry of `dense` is treated as a tag.
  static TagChunk FromDense(const Matrix& dense);

  Index rows() const { return y_.rows(); }
  Index cols() const { return y_.cols(); }
  const SparseRowMatrix& sparse() const { return y_; }
  Matrix dense() const { return Matrix(y_); }

  Index TagCount(Index row) const;
  /// Column indices tagged on `row`, ascending.
  std::vector<Index> TagsOf(Index row) const;

 private:
  SparseRowMatrix y_;
};

/// One word-embedding vector per tag column.
struct EmbeddingTable {
  Matrix vectors;                      // c x f
  std::vector<std::string> tag_names;  // c tokens, aligned with rows

  Index tags() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

/// Image-level semantic representation for one chunk.
struct SemanticChunk {
  Matrix z;                 // n x f
  std::vector<bool> valid;  // false for images with no tags (z row is zero)

  Index InvalidCount() const;
};

/// z_i = mean of e_j over tags j of image i; tagless rows get zero.
SemanticChunk PoolSemantics(const TagChunk& tags, const EmbeddingTable& table);

}  // namespace tagstream
