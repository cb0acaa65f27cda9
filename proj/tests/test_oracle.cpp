// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// The oracles are themselves checked on cases small enough to do by hand.

#include "doctest.h"
#include "oracle/oracles.hpp"

using oracle::Grid;

TEST_CASE("batch stats of an empty history are zero") {
  const auto s = oracle::ComputeBatchStats({}, 2, 3, 4, 5);
  CHECK(oracle::SquaredNorm(s.c1) == 0.0);
  CHECK(oracle::SquaredNorm(s.c3) == 0.0);
  CHECK(oracle::SquaredNorm(s.d2) == 0.0);
  CHECK(s.c4.rows == 3);
  CHECK(s.c4.cols == 2);
  CHECK(s.z_sq == 0.0);
}

TEST_CASE("batch stats of one chunk are that chunk's products") {
  oracle::ChunkRecord ch;
  ch.b = Grid(2, 2);
  ch.b.v = {1, 1, -1, 1};
  ch.phi = Grid(2, 1);
  ch.phi.v = {0.5, 0.25};
  ch.z = Grid(2, 1);
  ch.z.v = {2, 3};
  ch.y = Grid(2, 1);
  ch.y.v = {1, 0};
  ch.k = {2.0, 1.0};
  const auto s = oracle::ComputeBatchStats({ch}, 2, 1, 1, 1);
  CHECK(s.c1.v == std::vector<double>{2, 0, 0, 2});
  CHECK(s.c2.v == std::vector<double>{0.25, 0.75});
  CHECK(s.c3.v == std::vector<double>{0.3125});
  CHECK(s.c4.v == std::vector<double>{0.25, 0.75});
  CHECK(s.c5.v == std::vector<double>{-1, 5});
  CHECK(s.d1.v == std::vector<double>{3, 1, 1, 3});
  CHECK(s.d2.v == std::vector<double>{2, 2});
  CHECK(s.z_sq == 13.0);
  CHECK(s.y_weighted_sq == 2.0);
}

TEST_CASE("dense ranking: self match at 0, complement at r, stable ties") {
  const std::vector<int> q{1, -1, 1, 1};
  const std::vector<std::vector<int>> db{{-1, 1, -1, -1}, {1, -1, 1, 1}, {1, 1, 1, 1},
                                         {1, -1, 1, -1}};
  CHECK(oracle::DenseHamming(q, db[1]) == 0);
  CHECK(oracle::DenseHamming(q, db[0]) == 4);
  CHECK(oracle::DenseRank(q, db) == std::vector<std::size_t>{1, 2, 3, 0});
}

TEST_CASE("naive AP and MAP") {
  CHECK(*oracle::NaiveAveragePrecision({true, true, false}) == 1.0);
  CHECK(*oracle::NaiveAveragePrecision({false, true}) == 0.5);
  CHECK_FALSE(oracle::NaiveAveragePrecision({false, false}).has_value());
  const auto m = oracle::NaiveMap({{true}, {false, true}, {false}});
  CHECK(m.map == doctest::Approx(0.75));
  CHECK(m.evaluated == 2);
  CHECK(m.excluded == 1);
}

TEST_CASE("ridge solve matches a hand-computed system") {
  Grid a(2, 2);
  a.v = {2, 1, 1, 3};
  Grid rhs(2, 1);
  rhs.v = {3, 5};
  const Grid x = oracle::SolveRidge(a, 1.0, rhs);  // [[3,1],[1,4]] x = [3,5]
  CHECK(x.at(0, 0) == doctest::Approx(7.0 / 11.0));
  CHECK(x.at(1, 0) == doctest::Approx(12.0 / 11.0));
}
