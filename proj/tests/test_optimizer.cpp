// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tagstream/error.hpp"
#include "tagstream/optimizer.hpp"

using namespace tagstream;
using testing::RandomMatrix;
using testing::RandomSigns;
using testing::RandomTags;
using testing::RandomWeights;
using testing::ToGrid;
using testing::ToMatrix;

namespace {

// 4 x 4 Hadamard: columns orthogonal, B'B = 4I.
Matrix Hadamard4() {
  Matrix h(4, 4);
  h << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  return h;
}

ChunkData Chunk(Matrix phi, Matrix y, Matrix z) {
  ChunkData c = MakeChunkData(phi, TagChunk::FromDense(y), z);
  c.y = y;
  return c;
}

Hyperparams Hyper(int r, Index m, double alpha = 300) {
  Hyperparams h;
  h.bits = r;
  h.anchors = m;
  h.alpha = alpha;
  return h;
}

// Two random chunks: the first committed, the second live.
struct TwoChunks {
  AccumStats history;
  ChunkData current;
  Matrix b;
  Vector k;
  std::vector<oracle::ChunkRecord> records;  // both chunks
  Hyperparams hyper;
};

TwoChunks MakeTwoChunks(std::uint64_t seed, int r = 4, Index m = 6, Index f = 5, Index c = 7) {
  std::mt19937_64 rng(seed);
  TwoChunks t;
  t.hyper = Hyper(r, m, 2.0);
  t.history = AccumStats::Zero(r, m, f, c);
  ModelState counter;
  const ChunkData first = MakeChunkData(RandomMatrix(rng, 30, m).cwiseAbs(),
                                        RandomTags(rng, 30, c), RandomMatrix(rng, 30, f));
  const Matrix b1 = RandomSigns(rng, 30, r);
  const Vector k1 = RandomWeights(rng, 30);
  CommitRound(counter, t.history, first, b1, k1, 1);
  t.records.push_back(testing::Record(first, b1, k1));
  t.current = MakeChunkData(RandomMatrix(rng, 25, m).cwiseAbs(), RandomTags(rng, 25, c),
                            RandomMatrix(rng, 25, f));
  t.b = RandomSigns(rng, 25, r);
  t.k = RandomWeights(rng, 25);
  t.records.push_back(testing::Record(t.current, t.b, t.k));
  return t;
}

}  // namespace

TEST_CASE("seed derivation is deterministic and separates purposes") {
  CHECK(DeriveSeed(1, 2, 3) == DeriveSeed(1, 2, 3));
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 2, 4));
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 3, 3));
}

TEST_CASE("round initialization") {
  std::mt19937_64 rng(4);
  Hyperparams h = Hyper(5, 3);
  ModelState s;
  s.hyper = h;
  const ChunkData chunk = MakeChunkData(RandomMatrix(rng, 7, 3), RandomTags(rng, 7, 4),
                                        RandomMatrix(rng, 7, 2));
  const RoundInit a = InitRound(chunk, s, 42);
  const RoundInit b = InitRound(chunk, s, 42);
  CHECK(a.b == b.b);
  CHECK(a.w == b.w);
  CHECK((a.b.array().abs() == 1.0).all());
  CHECK(a.w.cwiseAbs().maxCoeff() < 0.1);
  CHECK(InitRound(chunk, s, 43).b != a.b);

  SUBCASE("one bit, one row") {
    s.hyper.bits = 1;
    const ChunkData one = MakeChunkData(Matrix::Ones(1, 3), TagChunk::FromPairs(1, 4, {{0, 0}}),
                                        Matrix::Ones(1, 2));
    const RoundInit i = InitRound(one, s, 1);
    CHECK(std::abs(i.b(0, 0)) == 1.0);
  }
  SUBCASE("warm start with W = 0 and unit tag rows gives unit weights") {
    s.round = 1;
    s.w = Matrix::Zero(5, 4);
    const ChunkData unit = MakeChunkData(
        Matrix::Ones(3, 3), TagChunk::FromPairs(3, 4, {{0, 0}, {1, 2}, {2, 3}}), Matrix::Ones(3, 2));
    const RoundInit i = InitRound(unit, s, 9);
    CHECK(i.w == s.w);
    CHECK(i.weights == Vector::Ones(3));
  }
}

TEST_CASE("U step: orthogonal design and ridge limit") {
  const Matrix b = Hadamard4();
  std::mt19937_64 rng(8);
  const Matrix phi = RandomMatrix(rng, 4, 6);
  const ChunkData chunk = Chunk(phi, Matrix::Zero(4, 2), Matrix::Zero(4, 3));
  const AccumStats none = AccumStats::Zero(4, 6, 3, 2);
  const Matrix u = UpdateU(none, chunk, b, Hyper(4, 6, 0.0));
  CHECK((u - b.transpose() * phi / 4.0).cwiseAbs().maxCoeff() <= 1e-12);

  Hyperparams big = Hyper(4, 4, 1e8);
  const ChunkData same = Chunk(b, Matrix::Zero(4, 2), Matrix::Zero(4, 3));
  const Matrix ur = UpdateU(AccumStats::Zero(4, 4, 3, 2), same, b, big);
  const Matrix limit = (big.beta / big.alpha) * (b.transpose() * b);
  CHECK(ur.cwiseAbs().maxCoeff() < 1e-6);
  CHECK((ur - limit).cwiseAbs().maxCoeff() <= 1e-3 * limit.cwiseAbs().maxCoeff());
}

TEST_CASE("closed-form steps equal batch solves over concatenated chunks") {
  const TwoChunks t = MakeTwoChunks(31);
  const auto o = oracle::ComputeBatchStats(t.records, 4, 6, 5, 7);
  const Hyperparams& h = t.hyper;

  const Matrix u = UpdateU(t.history, t.current, t.b, h);
  CHECK(oracle::RelativeDiff(ToGrid(u), oracle::SolveRidge(o.c1, h.alpha / h.beta, o.c2)) <=
        1e-9);
  const Matrix p = UpdateP(t.history, t.current, t.b, h);
  CHECK(oracle::RelativeDiff(ToGrid(p), oracle::SolveRidge(o.c3, h.alpha / h.mu, o.c4)) <= 1e-9);
  const Matrix v = UpdateV(t.history, t.current, t.b, h);
  CHECK(oracle::RelativeDiff(ToGrid(v), oracle::SolveRidge(o.c1, h.alpha / h.theta, o.c5)) <=
        1e-9);
  const Matrix w = UpdateW(t.history, t.current, t.b, t.k, h);
  CHECK(oracle::RelativeDiff(ToGrid(w), oracle::SolveRidge(o.d1, h.alpha, o.d2)) <= 1e-9);
}

TEST_CASE("closed-form steps are skipped when their weight is zero") {
  const TwoChunks t = MakeTwoChunks(32);
  Hyperparams h = t.hyper;
  h.beta = 0;
  h.theta = 0;
  h.mu = 0;
  CHECK(UpdateU(t.history, t.current, t.b, h).isZero());
  CHECK(UpdateV(t.history, t.current, t.b, h).isZero());
  CHECK(UpdateP(t.history, t.current, t.b, h).isZero());
  h.tag_regression = false;
  CHECK(UpdateW(t.history, t.current, t.b, t.k, h).isZero());
}

TEST_CASE("P step examples") {
  // Orthonormal phi columns: C3 = I, so P = C4 when alpha = 0.
  Matrix phi = Hadamard4() / 2.0;
  const Matrix b = Hadamard4().leftCols(2);
  const ChunkData chunk = Chunk(phi, Matrix::Zero(4, 1), Matrix::Zero(4, 1));
  const Matrix p = UpdateP(AccumStats::Zero(2, 4, 1, 1), chunk, b, Hyper(2, 4, 0.0));
  CHECK((p - phi.transpose() * b).cwiseAbs().maxCoeff() <= 1e-12);

  // Codes generated from a hidden projection are fitted better than by P = 0.
  std::mt19937_64 rng(15);
  const Matrix phi2 = RandomMatrix(rng, 40, 10).cwiseAbs();
  const Matrix b2 = (phi2 * RandomMatrix(rng, 10, 3)).unaryExpr(
      [](double x) { return x >= 0 ? 1.0 : -1.0; });
  const ChunkData c2 = Chunk(phi2, Matrix::Zero(40, 1), Matrix::Zero(40, 1));
  const Matrix p2 = UpdateP(AccumStats::Zero(3, 10, 1, 1), c2, b2, Hyper(3, 10, 1.0));
  CHECK((b2 - phi2 * p2).norm() < b2.norm());
}

TEST_CASE("V step examples") {
  const Matrix b = Hadamard4();
  std::mt19937_64 rng(16);
  const Matrix v_true = RandomMatrix(rng, 4, 3);
  const ChunkData chunk = Chunk(Matrix::Ones(4, 2), Matrix::Zero(4, 1), b * v_true);
  const Matrix v = UpdateV(AccumStats::Zero(4, 2, 3, 1), chunk, b, Hyper(4, 2, 0.0));
  CHECK((v - v_true).cwiseAbs().maxCoeff() <= 1e-12);
  const ChunkData zero = Chunk(Matrix::Ones(4, 2), Matrix::Zero(4, 1), Matrix::Zero(4, 3));
  CHECK(UpdateV(AccumStats::Zero(4, 2, 3, 1), zero, b, Hyper(4, 2)).isZero());
}

TEST_CASE("W step examples") {
  const Matrix b = Hadamard4();
  std::mt19937_64 rng(17);
  const Matrix y = RandomTags(rng, 4, 5).dense();
  const ChunkData chunk = Chunk(Matrix::Ones(4, 2), y, Matrix::Zero(4, 1));
  const AccumStats none = AccumStats::Zero(4, 2, 1, 5);
  const Matrix w = UpdateW(none, chunk, b, Vector::Ones(4), Hyper(4, 2, 0.0));
  CHECK((w - b.transpose() * y / 4.0).cwiseAbs().maxCoeff() <= 1e-12);
  const ChunkData empty = Chunk(Matrix::Ones(4, 2), Matrix::Zero(4, 5), Matrix::Zero(4, 1));
  CHECK(UpdateW(none, empty, b, Vector::Ones(4), Hyper(4, 2)).isZero());
}

TEST_CASE("reweighting") {
  Matrix y(2, 2);
  y << 3, 4, 1, 0;
  const Matrix b = Matrix::Ones(2, 1);
  Matrix w(1, 2);
  w << 0, 0;
  Vector k = ComputeReweights(y, b, w, 1e-6);
  CHECK(k(0) == doctest::Approx(0.2).epsilon(1e-15));
  w << 1, 0;
  k = ComputeReweights(y.bottomRows(1), b.bottomRows(1), w, 1e-6);
  CHECK(k(0) == 1e6);

  std::mt19937_64 rng(18);
  const Matrix yr = RandomMatrix(rng, 8, 5);
  const Matrix br = RandomSigns(rng, 8, 3);
  const Matrix wr = RandomMatrix(rng, 3, 5);
  const Vector kr = ComputeReweights(yr, br, wr, 1e-6);
  for (Index i = 0; i < 8; ++i) {
    double s = 0;
    for (Index j = 0; j < 5; ++j) {
      double fit = 0;
      for (Index l = 0; l < 3; ++l) fit += br(i, l) * wr(l, j);
      s += (yr(i, j) - fit) * (yr(i, j) - fit);
    }
    CHECK(std::abs(kr(i) - 1.0 / std::sqrt(s)) <= 1e-14 * kr(i));
  }
}

TEST_CASE("DCC: one bit takes the sign of Q") {
  std::mt19937_64 rng(19);
  const ChunkData chunk = MakeChunkData(RandomMatrix(rng, 9, 4), RandomTags(rng, 9, 3),
                                        RandomMatrix(rng, 9, 2));
  const Hyperparams h = Hyper(1, 4);
  const DccProblem dcc(chunk, RandomMatrix(rng, 1, 3), RandomMatrix(rng, 1, 4),
                       RandomMatrix(rng, 1, 2), RandomMatrix(rng, 4, 1), RandomWeights(rng, 9), h);
  Matrix b = RandomSigns(rng, 9, 1);
  dcc.UpdateBit(b, 0);
  for (Index i = 0; i < 9; ++i) CHECK(b(i, 0) == (dcc.q()(i, 0) >= 0 ? 1.0 : -1.0));
}

TEST_CASE("DCC: with only the hash term the codes are sign(mu phi P)") {
  std::mt19937_64 rng(20);
  const ChunkData chunk = MakeChunkData(RandomMatrix(rng, 12, 5), RandomTags(rng, 12, 3),
                                        RandomMatrix(rng, 12, 2));
  Hyperparams h = Hyper(4, 5);
  h.beta = 0;
  h.theta = 0;
  const Matrix p = RandomMatrix(rng, 5, 4);
  const DccProblem dcc(chunk, Matrix::Zero(4, 3), RandomMatrix(rng, 4, 5),
                       RandomMatrix(rng, 4, 2), p, RandomWeights(rng, 12), h);
  Matrix b = RandomSigns(rng, 12, 4);
  dcc.Solve(b, 1);
  const Matrix want = (h.mu * chunk.phi * p).unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; });
  CHECK(b == want);
}

TEST_CASE("DCC: objective matches the oracle and every bit update descends") {
  std::mt19937_64 rng(23);
  const Hyperparams h = Hyper(6, 5, 1.0);
  const ChunkData chunk = MakeChunkData(RandomMatrix(rng, 20, 5).cwiseAbs(),
                                        RandomTags(rng, 20, 4), RandomMatrix(rng, 20, 3));
  const Matrix w = RandomMatrix(rng, 6, 4);
  const Matrix u = RandomMatrix(rng, 6, 5);
  const Matrix v = RandomMatrix(rng, 6, 3);
  const Matrix p = RandomMatrix(rng, 5, 6);
  const Vector k = RandomWeights(rng, 20);
  const DccProblem dcc(chunk, w, u, v, p, k, h);
  Matrix b = RandomSigns(rng, 20, 6);
  auto oracle_value = [&](const Matrix& codes) {
    return oracle::CodeObjective(testing::Record(chunk, codes, k), ToGrid(w), ToGrid(u),
                                 ToGrid(v), ToGrid(p), h.beta, h.theta, h.mu);
  };
  CHECK(std::abs(dcc.Objective(b) - oracle_value(b)) <= 1e-9 * std::abs(oracle_value(b)));
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int l = 0; l < 6; ++l) {
      const double before = oracle_value(b);
      dcc.UpdateBit(b, l);
      CHECK(oracle_value(b) <= before + 1e-9);
    }
  }
  // Converged codes are a fixed point.
  dcc.Solve(b, 100);
  const Matrix settled = b;
  for (int l = 0; l < 6; ++l) CHECK_FALSE(dcc.UpdateBit(b, l));
  CHECK(b == settled);
}

TEST_CASE("run round smoke: T = 1, g = 1 on four samples") {
  std::mt19937_64 rng(24);
  Hyperparams h = Hyper(3, 2);
  h.iterations = 1;
  h.dcc_sweeps = 1;
  ModelState s;
  s.hyper = h;
  s.seed = 3;
  EmbeddingTable table;
  table.vectors = RandomMatrix(rng, 3, 2);
  table.tag_names = {"a", "b", "c"};
  const RoundResult r = RunRound(s, {}, RandomMatrix(rng, 4, 5), RandomTags(rng, 4, 3), table);
  CHECK(r.round == 1);
  CHECK(r.codes.rows() == 4);
  CHECK((r.codes.array().abs() == 1.0).all());
  CHECK(r.trace.size() == 1);
  CHECK(r.state.round == 1);
  CHECK(r.state.total_seen == 4);
  CHECK(r.state.anchors.count() == 2);
  CHECK(r.stats.c4 == r.stats.c2.transpose());
}

TEST_CASE("run round: deterministic, and each step descends the surrogate") {
  std::mt19937_64 rng(25);
  Hyperparams h = Hyper(8, 20, 5.0);
  ModelState s;
  s.hyper = h;
  s.seed = 11;
  EmbeddingTable table;
  table.vectors = RandomMatrix(rng, 6, 4);
  table.tag_names = {"a", "b", "c", "d", "e", "f"};
  const Matrix x = RandomMatrix(rng, 40, 5);
  const TagChunk tags = RandomTags(rng, 40, 6);
  RoundOptions opt;
  opt.step_trace = true;

  RoundResult r1 = RunRound(s, {}, x, tags, table, opt);
  const RoundResult again = RunRound(s, {}, x, tags, table, opt);
  CHECK(r1.codes == again.codes);
  CHECK(r1.state.p == again.state.p);

  // The same chunk fed repeatedly: descent holds within every round.
  ModelState state = r1.state;
  AccumStats stats = r1.stats;
  std::vector<RoundResult> rounds{r1};
  for (int t = 0; t < 3; ++t) {
    rounds.push_back(RunRound(state, stats, x, tags, table, opt));
    state = rounds.back().state;
    stats = rounds.back().stats;
  }
  for (const auto& r : rounds) {
    for (const auto& it : r.trace) {
      const double tol = 1e-9 * std::max(1.0, std::abs(it.start));
      CHECK(it.after_u <= it.start + tol);
      CHECK(it.after_p <= it.after_u + tol);
      CHECK(it.after_v <= it.after_p + tol);
      CHECK(it.after_w <= it.after_reweight + tol);
      CHECK(it.after_b <= it.after_w + tol);
    }
  }
  CHECK(state.round == 4);
  CHECK(state.total_seen == 160);
}

TEST_CASE("run round rejects bad input without touching the caller's state") {
  std::mt19937_64 rng(26);
  ModelState s;
  s.hyper = Hyper(4, 10);
  EmbeddingTable table;
  table.vectors = RandomMatrix(rng, 3, 2);
  table.tag_names = {"a", "b", "c"};
  CHECK_THROWS_AS(RunRound(s, {}, RandomMatrix(rng, 5, 3), RandomTags(rng, 5, 3), table), Error);
  Matrix x = RandomMatrix(rng, 12, 3);
  x(2, 1) = std::nan("");
  CHECK_THROWS_AS(RunRound(s, {}, x, RandomTags(rng, 12, 3), table), Error);
  CHECK_THROWS_AS(RunRound(s, {}, RandomMatrix(rng, 12, 3), RandomTags(rng, 12, 4), table), Error);
  CHECK(s.round == 0);
}
