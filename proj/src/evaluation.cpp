// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/evaluation.hpp"

#include <algorithm>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {
namespace {

std::vector<std::vector<Index>> Normalize(std::vector<std::vector<Index>> sets) {
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return sets;
}

std::vector<std::vector<Index>> RowsOf(const TagChunk& labels) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(labels.rows()));
  for (Index i = 0; i < labels.rows(); ++i) out[static_cast<std::size_t>(i)] = labels.TagsOf(i);
  return out;
}

std::vector<Index> Positions(const std::vector<Hit>& hits) {
  std::vector<Index> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back(h.position);
  return out;
}

}  // namespace

Judgments::Judgments(std::vector<std::vector<Index>> query_labels,
                     std::vector<std::vector<Index>> database_labels)
    : query_(Normalize(std::move(query_labels))),
      database_(Normalize(std::move(database_labels))) {}

Judgments Judgments::FromIncidence(const TagChunk& query_labels,
                                   const TagChunk& database_labels) {
  if (query_labels.cols() != database_labels.cols()) {
    throw ShapeError("query and database label vocabularies differ in size");
  }
  return Judgments(RowsOf(query_labels), RowsOf(database_labels));
}

bool Judgments::Relevant(Index query, Index database_position) const {
  const auto& a = query_.at(static_cast<std::size_t>(query));
  const auto& b = database_.at(static_cast<std::size_t>(database_position));
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

Index Judgments::RelevantCount(Index query) const {
  Index count = 0;
  for (Index p = 0; p < database_size(); ++p) count += Relevant(query, p) ? 1 : 0;
  return count;
}

std::optional<double> AveragePrecision(std::span<const Index> ranked, const Judgments& judgments,
                                       Index query) {
  Index hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (judgments.Relevant(query, ranked[k])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

PrecisionAtK PrecisionAt(std::span<const Index> ranked, const Judgments& judgments, Index query,
                         Index k) {
  if (k < 1) throw ConfigError("precision@k needs k >= 1");
  PrecisionAtK out;
  Index limit = k;
  if (static_cast<std::size_t>(k) > ranked.size()) {
    out.truncated = true;
    limit = static_cast<Index>(ranked.size());
  }
  if (limit == 0) return out;
  Index relevant = 0;
  for (Index i = 0; i < limit; ++i) {
    relevant += judgments.Relevant(query, ranked[static_cast<std::size_t>(i)]) ? 1 : 0;
  }
  out.value = static_cast<double>(relevant) / static_cast<double>(limit);
  return out;
}

MapReport MeanAveragePrecision(const CodeBlock& queries, const RetrievalIndex& index,
                               const Judgments& judgments, std::optional<Index> cutoff) {
  if (judgments.queries() != queries.count()) {
    throw ShapeError("judgments cover " + std::to_string(judgments.queries()) +
                     " queries but " + std::to_string(queries.count()) + " were hashed");
  }
  if (judgments.database_size() < index.size()) {
    throw ShapeError("judgments cover fewer database records than the index holds");
  }
  MapReport report;
  double sum = 0.0;
  for (Index q = 0; q < queries.count(); ++q) {
    const auto hits = HammingRank(queries.Code(q), queries.bits(), index, cutoff);
    const auto ranked = Positions(hits);
    if (auto ap = AveragePrecision(ranked, judgments, q)) {
      sum += *ap;
      ++report.evaluated;
    } else {
      ++report.excluded;
    }
  }
  report.map = report.evaluated > 0 ? sum / static_cast<double>(report.evaluated) : 0.0;
  return report;
}

double MeanPrecisionAt(const CodeBlock& queries, const RetrievalIndex& index,
                       const Judgments& judgments, Index k) {
  if (queries.count() == 0) return 0.0;
  double sum = 0.0;
  for (Index q = 0; q < queries.count(); ++q) {
    const auto ranked = Positions(HammingRank(queries.Code(q), queries.bits(), index, k));
    sum += PrecisionAt(ranked, judgments, q, k).value;
  }
  return sum / static_cast<double>(queries.count());
}

std::vector<RoundMap> MapPerRound(std::span<const RetrievalIndex> snapshots,
                                  std::span<const CodeBlock> query_codes,
                                  const Judgments& judgments, std::optional<Index> cutoff) {
  if (snapshots.size() != query_codes.size()) {
    throw ShapeError("need one query code block per snapshot");
  }
  std::vector<RoundMap> rows;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    rows.push_back({snapshots[i].model_round,
                    MeanAveragePrecision(query_codes[i], snapshots[i], judgments, cutoff)});
  }
  return rows;
}

}  // namespace tagstream
