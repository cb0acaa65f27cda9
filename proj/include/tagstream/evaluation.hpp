// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tagstream/codes.hpp"
#include "tagstream/retrieval.hpp"
#include "tagstream/semantics.hpp"

namespace tagstream {

/// Ground-truth label sets. Only evaluation reads these; training sees tags.
class Judgments {
 public:
  Judgments() = default;
  Judgments(std::vector<std::vector<Index>> query_labels,
            std::vector<std::vector<Index>> database_labels);
  /// Label incidence matrices share the TagChunk representation.
  static Judgments FromIncidence(const TagChunk& query_labels, const TagChunk& database_labels);

  Index queries() const { return static_cast<Index>(query_.size()); }
  Index database_size() const { return static_cast<Index>(database_.size()); }
  /// True iff the label sets intersect.
  bool Relevant(Index query, Index database_position) const;
  Index RelevantCount(Index query) const;

 private:
  std::vector<std::vector<Index>> query_;     // sorted, unique
  std::vector<std::vector<Index>> database_;  // sorted, unique
};

/// Average precision over `ranked` (database positions, best first).
/// Returns nullopt when no relevant item appears in `ranked`.
std::optional<double> AveragePrecision(std::span<const Index> ranked, const Judgments& judgments,
                                       Index query);

struct PrecisionAtK {
  double value = 0.0;
  bool truncated = false;  // k exceeded the list length
};

PrecisionAtK PrecisionAt(std::span<const Index> ranked, const Judgments& judgments, Index query,
                         Index k);

struct MapReport {
  double map = 0.0;
  Index evaluated = 0;
  Index excluded = 0;  // queries with no relevant item in the ranked list
};

/// Hamming-ranks every query against `index` and averages AP. With a cutoff,
/// AP is taken over the top `cutoff` results (MAP@k).
MapReport MeanAveragePrecision(const CodeBlock& queries, const RetrievalIndex& index,
                               const Judgments& judgments,
                               std::optional<Index> cutoff = std::nullopt);

/// Mean precision@k across queries.
double MeanPrecisionAt(const CodeBlock& queries, const RetrievalIndex& index,
                       const Judgments& judgments, Index k);

struct RoundMap {
  int round = 0;
  MapReport report;
};

/// One MAP row per (round snapshot, query codes hashed with that round's model).
std::vector<RoundMap> MapPerRound(std::span<const RetrievalIndex> snapshots,
                                  std::span<const CodeBlock> query_codes,
                                  const Judgments& judgments,
                                  std::optional<Index> cutoff = std::nullopt);

}  // namespace tagstream
