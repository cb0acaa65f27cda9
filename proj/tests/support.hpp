// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracle/oracles.hpp"
#include "tagstream/linalg.hpp"
#include "tagstream/model.hpp"
#include "tagstream/semantics.hpp"

namespace testing {

using tagstream::Index;
using tagstream::Matrix;
using tagstream::Vector;

inline oracle::Grid ToGrid(const Matrix& m) {
  oracle::Grid g(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) g.at(i, j) = m(i, j);
  }
  return g;
}

inline Matrix ToMatrix(const oracle::Grid& g) {
  Matrix m(g.rows, g.cols);
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) m(i, j) = g.at(i, j);
  }
  return m;
}

inline std::vector<double> ToVector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Matrix RandomMatrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

/// Rounds every entry through float32, as feature files store it.
inline Matrix RoundToFloat(const Matrix& m) {
  return m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

inline Matrix RandomSigns(std::mt19937_64& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = (rng() >> 63) ? 1.0 : -1.0;
  }
  return m;
}

/// Each entry set with probability `density`; every row gets at least one tag.
inline tagstream::TagChunk RandomTags(std::mt19937_64& rng, Index rows, Index cols,
                                      double density = 0.3) {
  std::bernoulli_distribution on(density);
  std::uniform_int_distribution<Index> any(0, cols - 1);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < rows; ++i) {
    bool some = false;
    for (Index j = 0; j < cols; ++j) {
      if (on(rng)) {
        pairs.emplace_back(i, j);
        some = true;
      }
    }
    if (!some) pairs.emplace_back(i, any(rng));
  }
  return tagstream::TagChunk::FromPairs(rows, cols, pairs);
}

inline Vector RandomWeights(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline oracle::ChunkRecord Record(const tagstream::ChunkData& chunk, const Matrix& b,
                                  const Vector& k) {
  return {ToGrid(chunk.phi), ToGrid(b), ToGrid(chunk.z), ToGrid(chunk.y), ToVector(k)};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tagstream_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
