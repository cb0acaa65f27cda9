// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/model.hpp"

#include <cmath>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {
namespace {

void RequireNonNegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be a finite non-negative number");
  }
}

// <A, B> Frobenius inner product.
double Dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

void CheckShapes(const ModelState& state, const AccumStats& history,
                 const ChunkData& chunk, const Matrix& b, const Vector& weights) {
  const Index n = chunk.rows();
  const Index r = state.hyper.bits;
  if (b.rows() != n || b.cols() != r) throw ShapeError("code block does not match chunk");
  if (weights.size() != n) throw ShapeError("reweighting diagonal does not match chunk");
  if (chunk.y.rows() != n || chunk.z.rows() != n) throw ShapeError("chunk parts disagree on rows");
  if (state.w.rows() != r || state.w.cols() != chunk.y.cols()) throw ShapeError("W shape");
  if (state.u.rows() != r || state.u.cols() != chunk.phi.cols()) throw ShapeError("U shape");
  if (state.v.rows() != r || state.v.cols() != chunk.z.cols()) throw ShapeError("V shape");
  if (state.p.rows() != chunk.phi.cols() || state.p.cols() != r) throw ShapeError("P shape");
  if (history.c1.rows() != r || history.c3.rows() != chunk.phi.cols() ||
      history.c5.cols() != chunk.z.cols() || history.d2.cols() != chunk.y.cols()) {
    throw ShapeError("accumulated statistics do not match the model");
  }
}

}  // namespace

void Hyperparams::Validate() const {
  RequireNonNegative(alpha, "alpha");
  RequireNonNegative(beta, "beta");
  RequireNonNegative(theta, "theta");
  RequireNonNegative(mu, "mu");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (dcc_sweeps < 1) throw ConfigError("dcc sweeps must be at least 1");
  if (bits < 1) throw ConfigError("code length must be at least 1 bit");
  if (anchors < 1) throw ConfigError("anchor count must be at least 1");
  if (!(epsilon_norm > 0.0)) throw ConfigError("epsilon_norm must be positive");
}

AccumStats AccumStats::Zero(int bits, Index anchors, Index embedding_dim, Index tags) {
  AccumStats s;
  s.c1 = Matrix::Zero(bits, bits);
  s.c2 = Matrix::Zero(bits, anchors);
  s.c3 = Matrix::Zero(anchors, anchors);
  s.c4 = Matrix::Zero(anchors, bits);
  s.c5 = Matrix::Zero(bits, embedding_dim);
  s.d1 = Matrix::Zero(bits, bits);
  s.d2 = Matrix::Zero(bits, tags);
  return s;
}

ChunkData MakeChunkData(Matrix phi, TagChunk tags, Matrix z) {
  if (tags.rows() != phi.rows() || z.rows() != phi.rows()) {
    throw ShapeError("features, tags and semantics disagree on the number of rows");
  }
  ChunkData out;
  out.phi_gram = phi.transpose() * phi;
  out.phi = std::move(phi);
  out.y = tags.dense();
  out.tags = std::move(tags);
  out.z = std::move(z);
  return out;
}

double SurrogateObjective(const ModelState& state, const AccumStats& history,
                          const ChunkData& chunk, const Matrix& b, const Vector& weights) {
  CheckShapes(state, history, chunk, b, weights);
  RequireFinite(b, "codes");
  RequireFinite(weights, "reweighting diagonal");
  const Hyperparams& h = state.hyper;
  const Matrix& w = state.w;
  const Matrix& u = state.u;
  const Matrix& v = state.v;
  const Matrix& p = state.p;

  double total = 0.0;
  if (h.tag_regression) {
    const double old_part =
        history.y_weighted_sq - 2.0 * Dot(w, history.d2) + Dot(w, history.d1 * w);
    const Vector row_sq = (chunk.y - b * w).rowwise().squaredNorm();
    total += old_part + weights.dot(row_sq);
  }
  if (h.beta != 0.0) {
    const double old_part =
        history.c3.trace() - 2.0 * Dot(u, history.c2) + Dot(u, history.c1 * u);
    total += h.beta * (old_part + (chunk.phi - b * u).squaredNorm());
  }
  if (h.theta != 0.0) {
    const double old_part = history.z_sq - 2.0 * Dot(v, history.c5) + Dot(v, history.c1 * v);
    total += h.theta * (old_part + (chunk.z - b * v).squaredNorm());
  }
  if (h.mu != 0.0) {
    const double old_part =
        history.c1.trace() - 2.0 * Dot(p, history.c4) + Dot(p, history.c3 * p);
    total += h.mu * (old_part + (b - chunk.phi * p).squaredNorm());
  }
  total += h.alpha * (w.squaredNorm() + u.squaredNorm() + v.squaredNorm() + p.squaredNorm());
  if (!std::isfinite(total)) throw NumericError("objective is not finite");
  return total;
}

double RegressionL21Objective(const Matrix& w, const AccumStats& history,
                              const ChunkData& chunk, const Matrix& b, double alpha) {
  if (b.rows() != chunk.rows() || w.rows() != b.cols() || w.cols() != chunk.y.cols()) {
    throw ShapeError("regression objective shapes disagree");
  }
  const double old_part =
      history.y_weighted_sq - 2.0 * Dot(w, history.d2) + Dot(w, history.d1 * w);
  const double l21 = (chunk.y - b * w).rowwise().norm().sum();
  return 0.5 * old_part + l21 + 0.5 * alpha * w.squaredNorm();
}

void CommitRound(ModelState& state, AccumStats& stats, const ChunkData& chunk,
                 const Matrix& b, const Vector& weights, int round_index) {
  if (round_index != state.round + 1) {
    throw StateError("round " + std::to_string(round_index) +
                     " cannot be committed after round " + std::to_string(state.round));
  }
  if (b.rows() != chunk.rows() || weights.size() != chunk.rows() ||
      b.cols() != stats.c1.rows()) {
    throw ShapeError("commit inputs do not match the chunk");
  }
  const Matrix bt_phi = b.transpose() * chunk.phi;
  const Matrix kb = weights.asDiagonal() * b;
  stats.c1.noalias() += b.transpose() * b;
  stats.c2 += bt_phi;
  stats.c3 += chunk.phi_gram;
  stats.c4 += bt_phi.transpose();
  stats.c5.noalias() += b.transpose() * chunk.z;
  stats.d1.noalias() += b.transpose() * kb;
  stats.d2.noalias() += kb.transpose() * chunk.y;
  stats.z_sq += chunk.z.squaredNorm();
  stats.y_weighted_sq += weights.dot(chunk.y.rowwise().squaredNorm());
  stats.samples += chunk.rows();
  state.round = round_index;
  state.total_seen += chunk.rows();
}

}  // namespace tagstream
