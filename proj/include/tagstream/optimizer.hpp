// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "tagstream/codes.hpp"
#include "tagstream/model.hpp"

namespace tagstream {

/// Deterministic stream for a named purpose within a round.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t round, std::uint64_t purpose);

struct RoundInit {
  Matrix b;        // n x r, uniform +-1
  Matrix w;        // warm start (previous round) or N(0, 0.01^2) at round 1
  Vector weights;  // reweighting diagonal from b and w
};

RoundInit InitRound(const ChunkData& chunk, const ModelState& state, std::uint64_t seed);

// Closed-form steps. Each uses the committed statistics in `history` plus the
// live contribution of the current chunk with codes `b`. A step whose trade-off
// weight is zero is skipped and returns a zero matrix.
Matrix UpdateU(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper);
Matrix UpdateP(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper);
Matrix UpdateV(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper);
Matrix UpdateW(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Vector& weights, const Hyperparams& hyper);

/// k_i = 1 / max(||y_i - b_i W||, epsilon).
Vector ComputeReweights(const Matrix& y, const Matrix& b, const Matrix& w, double epsilon);

/// The B subproblem of one outer iteration with W, U, V, P and the weights
/// frozen:
///   beta ||BU||^2 + theta ||BV||^2 + tr(W'B'KBW) - 2 tr(B'Q).
/// Rows of B are independent; each bit update is the exact minimizer over
/// that bit column given the others.
class DccProblem {
 public:
  DccProblem(const ChunkData& chunk, const Matrix& w, const Matrix& u, const Matrix& v,
             const Matrix& p, const Vector& weights, const Hyperparams& hyper);

  const Matrix& q() const { return q_; }
  double Objective(const Matrix& b) const;
  /// Re-solves bit column `bit`; returns true if any entry changed.
  bool UpdateBit(Matrix& b, int bit) const;
  /// Up to `sweeps` cyclic passes over all bits, stopping at a fixed point.
  /// Returns the number of passes run.
  int Solve(Matrix& b, int sweeps) const;

 private:
  Matrix q_;
  Matrix gram_w_;   // W W'
  Matrix gram_uv_;  // beta U U' + theta V V'
  Matrix w_;
  Matrix u_;
  Matrix v_;
  Vector weights_;
  double beta_;
  double theta_;
};

/// Surrogate objective values around each step of one outer iteration. The
/// reweighting changes the surrogate, so `after_reweight` restarts the chain.
struct IterationTrace {
  double start = 0.0;
  double after_u = 0.0;
  double after_p = 0.0;
  double after_v = 0.0;
  double after_reweight = 0.0;
  double after_w = 0.0;
  double after_b = 0.0;
  double l21 = 0.0;  // RegressionL21Objective after the B step
  int dcc_passes = 0;
};

struct RoundOptions {
  // Record start/after_u/... for every step; otherwise only after_b and l21.
  bool step_trace = false;
};

struct RoundResult {
  int round = 0;
  ModelState state;  // parameters after the round, already committed
  AccumStats stats;
  Matrix codes;      // n x r, +-1
  Vector weights;    // frozen into D1/D2
  std::vector<IterationTrace> trace;
  double seconds = 0.0;
};

/// One full round: anchors and width on the first round, kernelization,
/// semantic pooling, T alternations of U, P, V, reweight, W and B, then
/// commit. Inputs are not modified; callers swap in the result, so an
/// aborted round leaves their state untouched.
RoundResult RunRound(const ModelState& state, const AccumStats& stats, const Matrix& features,
                     const TagChunk& tags, const EmbeddingTable& table,
                     const RoundOptions& options = {});

/// Kernelization and pooling for a chunk against a model with finalized anchors.
ChunkData PrepareChunk(const ModelState& state, const Matrix& features, const TagChunk& tags,
                       const EmbeddingTable& table);

}  // namespace tagstream
