// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "tagstream/linalg.hpp"

namespace tagstream {

/// Fixed reference points for the Gaussian feature map.
///
/// Anchors are sampled from the first chunk of the stream and never change
/// afterwards; the width is estimated once from that same chunk.
struct AnchorSet {
  Matrix anchors;             // m x d, one anchor per row
  double kernel_width = 0.0;  // sigma

  Index count() const { return anchors.rows(); }
  Index dim() const { return anchors.cols(); }
  bool finalized() const { return anchors.rows() > 0 && kernel_width > 0.0; }
};

/// Picks `m` distinct rows of `first_chunk` uniformly without replacement.
/// Throws DataError when the chunk has fewer than `m` rows.
AnchorSet SelectAnchors(const Matrix& first_chunk, Index m, std::uint64_t seed);

/// Mean Euclidean distance over every (sample, anchor) pair.
/// Throws NumericError when the result is zero.
double ComputeKernelWidth(const Matrix& x, const AnchorSet& anchors);

/// phi(x)_j = exp(-||x - a_j||^2 / (2 sigma^2)); n x m result.
Matrix RbfMap(const Matrix& x, const AnchorSet& anchors);

}  // namespace tagstream
