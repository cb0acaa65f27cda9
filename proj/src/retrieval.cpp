// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <unordered_set>

#include "tagstream/error.hpp"

namespace tagstream {

CodeBlock HashQueries(const Matrix& queries, const ModelState& state) {
  if (state.round == 0 || !state.anchors.finalized()) {
    throw StateError("the model has not completed a round yet");
  }
  const Matrix phi = RbfMap(queries, state.anchors);
  return CodeBlock::FromSigns(phi * state.p);
}

RetrievalIndex SnapshotIndex(std::span<const CodeBlock> blocks,
                             std::span<const std::uint64_t> ids, int model_round) {
  RetrievalIndex out;
  out.model_round = model_round;
  for (const CodeBlock& block : blocks) out.codes.Append(block);
  if (static_cast<Index>(ids.size()) != out.codes.count()) {
    throw ShapeError("index has " + std::to_string(out.codes.count()) + " codes but " +
                     std::to_string(ids.size()) + " ids");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(ids.size());
  for (std::uint64_t id : ids) {
    if (!seen.insert(id).second) throw DataError("duplicate record id " + std::to_string(id));
  }
  out.ids.assign(ids.begin(), ids.end());
  return out;
}

int HammingDistance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

std::vector<Hit> HammingRank(std::span<const std::uint64_t> query, int query_bits,
                             const RetrievalIndex& index, std::optional<Index> k) {
  const Index n = index.size();
  if (n == 0) return {};
  if (query_bits != index.bits()) {
    throw ShapeError("query has " + std::to_string(query_bits) + " bits, index has " +
                     std::to_string(index.bits()));
  }
  if (k && *k < 0) throw ConfigError("cutoff must be non-negative");
  const int r = index.bits();
  std::vector<int> dist(static_cast<std::size_t>(n));
  // Counting sort over the r + 1 possible distances keeps insertion order
  // within each bucket.
  std::vector<Index> bucket_start(static_cast<std::size_t>(r) + 2, 0);
  for (Index i = 0; i < n; ++i) {
    const int d = HammingDistance(query, index.codes.Code(i));
    dist[static_cast<std::size_t>(i)] = d;
    ++bucket_start[static_cast<std::size_t>(d) + 1];
  }
  for (int d = 0; d <= r; ++d) bucket_start[d + 1] += bucket_start[d];

  const Index limit = k ? std::min(*k, n) : n;
  std::vector<Hit> hits(static_cast<std::size_t>(limit));
  for (Index i = 0; i < n; ++i) {
    const int d = dist[static_cast<std::size_t>(i)];
    const Index slot = bucket_start[static_cast<std::size_t>(d)]++;
    if (slot < limit) {
      hits[static_cast<std::size_t>(slot)] = {i, index.ids[static_cast<std::size_t>(i)], d};
    }
  }
  return hits;
}

}  // namespace tagstream
