// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "tagstream/kernel.hpp"
#include "tagstream/linalg.hpp"
#include "tagstream/semantics.hpp"

namespace tagstream {

struct Hyperparams {
  double alpha = 300.0;  // Frobenius regularizer on W, U, V, P
  double beta = 0.1;     // visual reconstruction weight
  double theta = 0.1;    // semantic reconstruction weight
  double mu = 10.0;      // hash-function fit weight
  int iterations = 7;    // outer alternations per round (T)
  int dcc_sweeps = 3;    // bit sweeps per B step (g)
  int bits = 16;         // code length r
  Index anchors = 1000;  // m
  double epsilon_norm = 1e-6;
  // Robust tag regression term; disabled only by the woh-2 ablation.
  bool tag_regression = true;

  /// Throws ConfigError on out-of-range values.
  void Validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Learned parameters plus the bookkeeping needed to continue the stream.
struct ModelState {
  Hyperparams hyper;
  std::uint64_t seed = 0;
  AnchorSet anchors;
  Matrix w;  // r x c, codes -> tags
  Matrix u;  // r x m, codes -> kernel features
  Matrix v;  // r x f, codes -> semantics
  Matrix p;  // m x r, hash projection
  Index feature_dim = 0;
  Index tag_count = 0;
  Index embedding_dim = 0;
  int round = 0;          // committed rounds
  Index total_seen = 0;   // N_t
};

/// Streaming sufficient statistics over every committed chunk.
///
/// C3 and its trace stand in for the old kernel features, trace(C1) for
/// the old codes; the two scalars carry the remaining constants so the
/// objective over all data is recoverable without the raw history.
struct AccumStats {
  Matrix c1;  // r x r   sum B'B
  Matrix c2;  // r x m   sum B'phi
  Matrix c3;  // m x m   sum phi'phi
  Matrix c4;  // m x r   sum phi'B
  Matrix c5;  // r x f   sum B'Z
  Matrix d1;  // r x r   sum B' diag(k) B
  Matrix d2;  // r x c   sum B' diag(k) Y
  double z_sq = 0.0;           // sum ||z_i||^2
  double y_weighted_sq = 0.0;  // sum k_i ||y_i||^2
  Index samples = 0;

  static AccumStats Zero(int bits, Index anchors, Index embedding_dim, Index tags);
};

/// Everything the optimizer needs from one chunk after kernelization.
struct ChunkData {
  Matrix phi;       // n x m
  Matrix phi_gram;  // phi' phi, fixed for the round
  TagChunk tags;    // n x c
  Matrix y;         // dense copy of tags
  Matrix z;         // n x f

  Index rows() const { return phi.rows(); }
};

ChunkData MakeChunkData(Matrix phi, TagChunk tags, Matrix z);

/// Full objective with the l2,1 tag term replaced by its reweighted
/// quadratic: history terms from `history` (frozen weights inside D1/D2)
/// plus the current chunk with `weights`. `b` is used literally, so any
/// real matrix is accepted.
double SurrogateObjective(const ModelState& state, const AccumStats& history,
                          const ChunkData& chunk, const Matrix& b, const Vector& weights);

/// Tag-regression objective in its l2,1 form for the current chunk:
///   0.5 * (frozen history quadratic) + sum_i ||y_i - b_i W|| + (alpha / 2) ||W||^2.
/// The halves match the weighting 1 / ||row|| used by the W step, which makes
/// this the function that the reweight/solve pair majorizes.
double RegressionL21Objective(const Matrix& w, const AccumStats& history,
                              const ChunkData& chunk, const Matrix& b, double alpha);

/// Folds the converged chunk into `stats` and advances the round counter.
/// `round_index` must be state.round + 1; anything else is a double commit.
void CommitRound(ModelState& state, AccumStats& stats, const ChunkData& chunk,
                 const Matrix& b, const Vector& weights, int round_index);

}  // namespace tagstream
