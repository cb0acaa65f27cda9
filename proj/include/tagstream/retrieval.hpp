// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tagstream/codes.hpp"
#include "tagstream/model.hpp"

namespace tagstream {

/// Immutable view of the code database at a round boundary.
struct RetrievalIndex {
  CodeBlock codes;
  std::vector<std::uint64_t> ids;
  int model_round = 0;

  Index size() const { return codes.count(); }
  int bits() const { return codes.bits(); }
};

struct Hit {
  Index position;  // insertion order in the index
  std::uint64_t id;
  int distance;

  friend bool operator==(const Hit&, const Hit&) = default;
};

/// B_q = sign(phi(X_q) P) with sign(0) = +1.
CodeBlock HashQueries(const Matrix& queries, const ModelState& state);

/// Concatenates committed blocks in round order. Ids must be unique.
RetrievalIndex SnapshotIndex(std::span<const CodeBlock> blocks,
                             std::span<const std::uint64_t> ids, int model_round);

/// Popcount distance between two packed codes of equal length.
int HammingDistance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Ascending distance, ties in insertion order; min(k, N) hits. No cutoff
/// ranks the whole index.
std::vector<Hit> HammingRank(std::span<const std::uint64_t> query, int query_bits,
                             const RetrievalIndex& index,
                             std::optional<Index> k = std::nullopt);

}  // namespace tagstream
