// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slow reference computations used only by tests. Everything here is written
// with scalar loops over std::vector and shares no code with the library, so
// agreement with the library is evidence rather than tautology. Intended for
// test-scale inputs (a few thousand rows at most).

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

/// Row-major dense matrix.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

Grid Multiply(const Grid& a, const Grid& b);
Grid Transpose(const Grid& a);
Grid Add(const Grid& a, const Grid& b);
double SquaredNorm(const Grid& a);
double MaxAbsDiff(const Grid& a, const Grid& b);
/// max |a - b| / max(1, max |b|)
double RelativeDiff(const Grid& a, const Grid& b);
/// Stacks row blocks vertically.
Grid Stack(const std::vector<Grid>& blocks);

// --- kernel and semantics -------------------------------------------------

double MeanDistance(const Grid& x, const Grid& anchors);
Grid Rbf(const Grid& x, const Grid& anchors, double sigma);
/// Row i = mean of embedding rows j with y(i, j) != 0; zero row if none.
Grid MeanPool(const Grid& y, const Grid& embeddings);

// --- objective pieces -----------------------------------------------------

/// One chunk as seen by the objective. `k` holds the reweighting diagonal.
struct ChunkRecord {
  Grid phi;  // n x m
  Grid b;    // n x r, entries +-1 (any reals accepted)
  Grid z;    // n x f
  Grid y;    // n x c
  std::vector<double> k;
};

struct BatchStats {
  Grid c1, c2, c3, c4, c5, d1, d2;
  double z_sq = 0.0;
  double y_weighted_sq = 0.0;
};

/// Every statistic straight from the concatenated chunks.
BatchStats ComputeBatchStats(const std::vector<ChunkRecord>& chunks, std::size_t r, std::size_t m,
                             std::size_t f, std::size_t c);

struct Weights {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  bool tag_regression = true;
};

/// Reweighted quadratic objective summed over every chunk, all terms rebuilt
/// from raw data.
double FullObjective(const std::vector<ChunkRecord>& chunks, const Grid& w, const Grid& u,
                     const Grid& v, const Grid& p, const Weights& weights);

/// Subproblem objectives of the closed-form steps over all chunks.
double ObjectiveU(const std::vector<ChunkRecord>& chunks, const Grid& u, double alpha,
                  double beta);
double ObjectiveP(const std::vector<ChunkRecord>& chunks, const Grid& p, double alpha, double mu);
double ObjectiveV(const std::vector<ChunkRecord>& chunks, const Grid& v, double alpha,
                  double theta);
double ObjectiveW(const std::vector<ChunkRecord>& chunks, const Grid& w, double alpha);

/// 0.5 * (history weighted quadratic) + sum_i ||y_i - b_i W|| over `current`
/// + 0.5 * alpha * ||W||^2.
double L21Objective(const std::vector<ChunkRecord>& history, const ChunkRecord& current,
                    const Grid& w, double alpha);

/// B-step objective of one chunk (constants dropped):
/// sum_i k_i ||b_i W||^2 + beta ||BU||^2 + theta ||BV||^2 - 2 <B, Q>
/// with Q = diag(k) Y W' + beta Phi U' + theta Z V' + mu Phi P.
double CodeObjective(const ChunkRecord& chunk, const Grid& w, const Grid& u, const Grid& v,
                     const Grid& p, double beta, double theta, double mu);

/// Solves (A + ridge I) X = R by Gaussian elimination with partial pivoting.
Grid SolveRidge(const Grid& a, double ridge, const Grid& rhs);

// --- retrieval and evaluation ---------------------------------------------

int DenseHamming(const std::vector<int>& a, const std::vector<int>& b);
/// Positions sorted by (distance, position) via a stable O(n^2) selection.
std::vector<std::size_t> DenseRank(const std::vector<int>& query,
                                   const std::vector<std::vector<int>>& database);

/// AP over relevance flags in rank order; nullopt when nothing is relevant.
/// Quadratic: precision at each hit is recounted from the top.
std::optional<double> NaiveAveragePrecision(const std::vector<bool>& relevant_in_order);

struct NaiveMapResult {
  double map = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
};
NaiveMapResult NaiveMap(const std::vector<std::vector<bool>>& relevance_per_query);

/// True when the two sorted-or-not label lists share an element.
bool SharesLabel(const std::vector<long>& a, const std::vector<long>& b);

}  // namespace oracle
