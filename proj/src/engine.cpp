// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/engine.hpp"

#include <numeric>
#include <string>
#include <unordered_set>

#include "tagstream/error.hpp"

namespace tagstream {

Engine::Engine(const Hyperparams& hyper, std::uint64_t seed, EmbeddingTable embeddings)
    : embeddings_(std::move(embeddings)) {
  hyper.Validate();
  if (embeddings_.tags() < 1 || embeddings_.dim() < 1) {
    throw ConfigError("embedding table must hold at least one tag with a non-empty vector");
  }
  RequireFinite(embeddings_.vectors, "embedding table");
  state_.hyper = hyper;
  state_.seed = seed;
}

Engine Engine::FromCheckpoint(Checkpoint checkpoint) {
  Engine e;
  e.state_ = std::move(checkpoint.state);
  e.stats_ = std::move(checkpoint.stats);
  e.embeddings_ = std::move(checkpoint.embeddings);
  e.database_ = std::move(checkpoint.database);
  return e;
}

Checkpoint Engine::ToCheckpoint() const {
  if (in_round_) throw StateError("cannot checkpoint while a round is in progress");
  return {state_, stats_, embeddings_, database_};
}

void Engine::Save(const std::filesystem::path& path) const { SaveCheckpoint(path, ToCheckpoint()); }

Engine Engine::Load(const std::filesystem::path& path) { return FromCheckpoint(LoadCheckpoint(path)); }

RoundReport Engine::Train(const Matrix& features, const TagChunk& tags,
                          std::span<const std::uint64_t> ids, const RoundOptions& options) {
  if (in_round_) throw StateError("a round is already in progress");
  const Index n = features.rows();
  std::vector<std::uint64_t> chunk_ids;
  if (ids.empty()) {
    chunk_ids.resize(static_cast<std::size_t>(n));
    std::iota(chunk_ids.begin(), chunk_ids.end(), static_cast<std::uint64_t>(state_.total_seen));
  } else {
    if (static_cast<Index>(ids.size()) != n) throw ShapeError("one id per chunk row is required");
    chunk_ids.assign(ids.begin(), ids.end());
  }
  std::unordered_set<std::uint64_t> seen(database_.ids.begin(), database_.ids.end());
  for (std::uint64_t id : chunk_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate record id " + std::to_string(id));
  }

  in_round_ = true;
  struct Reset {
    bool& flag;
    ~Reset() { flag = false; }
  } reset{in_round_};

  RoundResult result = RunRound(state_, stats_, features, tags, embeddings_, options);

  RoundReport report;
  report.round = result.round;
  report.samples = n;
  for (Index i = 0; i < n; ++i) report.tagless += tags.TagCount(i) == 0 ? 1 : 0;
  report.seconds = result.seconds;
  report.trace = std::move(result.trace);

  database_.codes.Append(CodeBlock::FromSigns(result.codes));
  database_.ids.insert(database_.ids.end(), chunk_ids.begin(), chunk_ids.end());
  database_.round_sizes.push_back(n);
  state_ = std::move(result.state);
  stats_ = std::move(result.stats);
  last_codes_ = std::move(result.codes);
  return report;
}

CodeBlock Engine::Hash(const Matrix& queries) const { return HashQueries(queries, state_); }

RetrievalIndex Engine::Snapshot() const {
  if (in_round_) throw StateError("cannot snapshot while a round is in progress");
  return SnapshotIndex(std::span(&database_.codes, 1), database_.ids, state_.round);
}

}  // namespace tagstream
