// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {
namespace {

enum Purpose : std::uint64_t { kAnchorPurpose = 1, kWeightPurpose = 2, kCodePurpose = 3 };

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void CheckFiniteState(const ModelState& s) {
  RequireFinite(s.w, "W");
  RequireFinite(s.u, "U");
  RequireFinite(s.v, "V");
  RequireFinite(s.p, "P");
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t round, std::uint64_t purpose) {
  return SplitMix64(SplitMix64(SplitMix64(base) ^ round) ^ purpose);
}

RoundInit InitRound(const ChunkData& chunk, const ModelState& state, std::uint64_t seed) {
  const Index n = chunk.rows();
  const int r = state.hyper.bits;
  RoundInit out;
  std::mt19937_64 rng(seed);
  out.b.resize(n, r);
  // Row-major fill so the sequence does not depend on storage order.
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) out.b(i, j) = (rng() >> 63) ? 1.0 : -1.0;
  }
  if (state.round == 0 || state.w.size() == 0) {
    std::mt19937_64 wrng(DeriveSeed(state.seed, 0, kWeightPurpose));
    std::normal_distribution<double> gauss(0.0, 0.01);
    out.w.resize(r, chunk.y.cols());
    for (Index i = 0; i < out.w.rows(); ++i) {
      for (Index j = 0; j < out.w.cols(); ++j) out.w(i, j) = gauss(wrng);
    }
  } else {
    out.w = state.w;
  }
  out.weights = ComputeReweights(chunk.y, out.b, out.w, state.hyper.epsilon_norm);
  return out;
}

Matrix UpdateU(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper) {
  if (hyper.beta == 0.0) return Matrix::Zero(b.cols(), chunk.phi.cols());
  const Matrix c1 = history.c1 + b.transpose() * b;
  const Matrix c2 = history.c2 + b.transpose() * chunk.phi;
  return SolveSymmetric(c1, hyper.alpha / hyper.beta, c2);
}

Matrix UpdateP(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper) {
  if (hyper.mu == 0.0) return Matrix::Zero(chunk.phi.cols(), b.cols());
  const Matrix c3 = history.c3 + chunk.phi_gram;
  const Matrix c4 = history.c4 + chunk.phi.transpose() * b;
  return SolveSymmetric(c3, hyper.alpha / hyper.mu, c4);
}

Matrix UpdateV(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Hyperparams& hyper) {
  if (hyper.theta == 0.0) return Matrix::Zero(b.cols(), chunk.z.cols());
  const Matrix c1 = history.c1 + b.transpose() * b;
  const Matrix c5 = history.c5 + b.transpose() * chunk.z;
  return SolveSymmetric(c1, hyper.alpha / hyper.theta, c5);
}

Matrix UpdateW(const AccumStats& history, const ChunkData& chunk, const Matrix& b,
               const Vector& weights, const Hyperparams& hyper) {
  if (!hyper.tag_regression) return Matrix::Zero(b.cols(), chunk.y.cols());
  if (weights.size() != b.rows()) throw ShapeError("reweighting diagonal does not match codes");
  const Matrix kb = weights.asDiagonal() * b;
  const Matrix d1 = history.d1 + b.transpose() * kb;
  const Matrix d2 = history.d2 + kb.transpose() * chunk.y;
  return SolveSymmetric(d1, hyper.alpha, d2);
}

Vector ComputeReweights(const Matrix& y, const Matrix& b, const Matrix& w, double epsilon) {
  if (y.rows() != b.rows() || b.cols() != w.rows() || w.cols() != y.cols()) {
    throw ShapeError("reweighting inputs disagree in shape");
  }
  const Vector norms = (y - b * w).rowwise().norm();
  return norms.array().max(epsilon).inverse().matrix();
}

DccProblem::DccProblem(const ChunkData& chunk, const Matrix& w, const Matrix& u,
                       const Matrix& v, const Matrix& p, const Vector& weights,
                       const Hyperparams& hyper)
    : w_(w), u_(u), v_(v), weights_(weights), beta_(hyper.beta), theta_(hyper.theta) {
  const Index n = chunk.rows();
  if (weights.size() != n) throw ShapeError("reweighting diagonal does not match chunk");
  q_ = weights.asDiagonal() * (chunk.y * w.transpose());
  q_.noalias() += hyper.beta * (chunk.phi * u.transpose());
  q_.noalias() += hyper.theta * (chunk.z * v.transpose());
  q_.noalias() += hyper.mu * (chunk.phi * p);
  gram_w_ = w * w.transpose();
  gram_uv_ = hyper.beta * (u * u.transpose()) + hyper.theta * (v * v.transpose());
}

double DccProblem::Objective(const Matrix& b) const {
  const Matrix bw = b * w_;
  return beta_ * (b * u_).squaredNorm() + theta_ * (b * v_).squaredNorm() +
         weights_.dot(bw.rowwise().squaredNorm()) - 2.0 * (b.array() * q_.array()).sum();
}

bool DccProblem::UpdateBit(Matrix& b, int bit) const {
  Vector gw = gram_w_.col(bit);
  Vector guv = gram_uv_.col(bit);
  gw(bit) = 0.0;
  guv(bit) = 0.0;
  const Vector target =
      q_.col(bit) - weights_.cwiseProduct(b * gw) - b * guv;
  bool changed = false;
  for (Index i = 0; i < b.rows(); ++i) {
    const double next = target(i) >= 0.0 ? 1.0 : -1.0;
    if (b(i, bit) != next) {
      b(i, bit) = next;
      changed = true;
    }
  }
  return changed;
}

int DccProblem::Solve(Matrix& b, int sweeps) const {
  int passes = 0;
  while (passes < sweeps) {
    ++passes;
    bool changed = false;
    for (int bit = 0; bit < b.cols(); ++bit) changed |= UpdateBit(b, bit);
    if (!changed) break;
  }
  return passes;
}

ChunkData PrepareChunk(const ModelState& state, const Matrix& features, const TagChunk& tags,
                       const EmbeddingTable& table) {
  if (features.rows() != tags.rows()) {
    throw ShapeError("chunk has " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(tags.rows()) + " tag rows");
  }
  if (state.feature_dim != 0 && features.cols() != state.feature_dim) {
    throw ShapeError("feature dimension " + std::to_string(features.cols()) +
                     " differs from the model's " + std::to_string(state.feature_dim));
  }
  RequireFinite(features, "features");
  Matrix phi = RbfMap(features, state.anchors);
  SemanticChunk sem = PoolSemantics(tags, table);
  return MakeChunkData(std::move(phi), tags, std::move(sem.z));
}

RoundResult RunRound(const ModelState& state, const AccumStats& stats, const Matrix& features,
                     const TagChunk& tags, const EmbeddingTable& table,
                     const RoundOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Hyperparams& h = state.hyper;
  h.Validate();
  if (features.rows() < 1) throw DataError("chunk is empty");

  RoundResult out;
  out.round = state.round + 1;
  out.state = state;
  ModelState& next = out.state;

  if (state.round == 0) {
    RequireFinite(features, "features");
    if (table.tags() != tags.cols()) {
      throw ShapeError("embedding table size does not match the tag columns");
    }
    next.anchors = SelectAnchors(features, h.anchors, DeriveSeed(state.seed, 0, kAnchorPurpose));
    next.anchors.kernel_width = ComputeKernelWidth(features, next.anchors);
    next.feature_dim = features.cols();
    next.tag_count = tags.cols();
    next.embedding_dim = table.dim();
    next.u = Matrix::Zero(h.bits, h.anchors);
    next.v = Matrix::Zero(h.bits, table.dim());
    next.p = Matrix::Zero(h.anchors, h.bits);
    out.stats = AccumStats::Zero(h.bits, h.anchors, table.dim(), tags.cols());
  } else {
    if (tags.cols() != state.tag_count || table.dim() != state.embedding_dim) {
      throw ShapeError("chunk tags or embeddings do not match the model");
    }
    out.stats = stats;
  }
  const AccumStats& history = out.stats;

  const ChunkData chunk = PrepareChunk(next, features, tags, table);
  RoundInit init = InitRound(chunk, next, DeriveSeed(state.seed, out.round, kCodePurpose));
  next.w = std::move(init.w);
  Matrix b = std::move(init.b);
  Vector weights = std::move(init.weights);
  const Matrix zero_w = Matrix::Zero(h.bits, chunk.y.cols());
  if (!h.tag_regression) next.w = zero_w;

  for (int it = 0; it < h.iterations; ++it) {
    IterationTrace t;
    auto objective = [&] { return SurrogateObjective(next, history, chunk, b, weights); };
    if (options.step_trace) t.start = objective();
    next.u = UpdateU(history, chunk, b, h);
    if (options.step_trace) t.after_u = objective();
    next.p = UpdateP(history, chunk, b, h);
    if (options.step_trace) t.after_p = objective();
    next.v = UpdateV(history, chunk, b, h);
    if (options.step_trace) t.after_v = objective();
    if (h.tag_regression) {
      weights = ComputeReweights(chunk.y, b, next.w, h.epsilon_norm);
      if (options.step_trace) t.after_reweight = objective();
      next.w = UpdateW(history, chunk, b, weights, h);
    } else if (options.step_trace) {
      t.after_reweight = objective();
    }
    if (options.step_trace) t.after_w = objective();

    const DccProblem dcc(chunk, h.tag_regression ? next.w : zero_w, next.u, next.v, next.p,
                         weights, h);
    t.dcc_passes = dcc.Solve(b, h.dcc_sweeps);
    CheckFiniteState(next);
    t.after_b = objective();
    t.l21 = h.tag_regression ? RegressionL21Objective(next.w, history, chunk, b, h.alpha) : 0.0;
    out.trace.push_back(t);
  }

  out.weights = h.tag_regression ? ComputeReweights(chunk.y, b, next.w, h.epsilon_norm)
                                 : Vector::Ones(chunk.rows());
  CommitRound(next, out.stats, chunk, b, out.weights, out.round);
  out.codes = std::move(b);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace tagstream
