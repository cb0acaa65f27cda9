// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tagstream/io.hpp"
#include "tagstream/optimizer.hpp"
#include "tagstream/retrieval.hpp"

namespace tagstream {

struct RoundReport {
  int round = 0;
  Index samples = 0;
  Index tagless = 0;  // rows with no tags (kept, zero semantics)
  double seconds = 0.0;
  std::vector<IterationTrace> trace;
};

/// The streaming model together with the codes of every committed record.
/// A failed round leaves the engine exactly as it was.
class Engine {
 public:
  Engine(const Hyperparams& hyper, std::uint64_t seed, EmbeddingTable embeddings);

  static Engine FromCheckpoint(Checkpoint checkpoint);
  Checkpoint ToCheckpoint() const;
  void Save(const std::filesystem::path& path) const;
  static Engine Load(const std::filesystem::path& path);

  /// Learns codes for one chunk and commits it. `ids` defaults to the
  /// running record count.
  RoundReport Train(const Matrix& features, const TagChunk& tags,
                    std::span<const std::uint64_t> ids = {}, const RoundOptions& options = {});

  CodeBlock Hash(const Matrix& queries) const;
  RetrievalIndex Snapshot() const;

  const ModelState& state() const { return state_; }
  const AccumStats& stats() const { return stats_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }
  const CodeDatabase& database() const { return database_; }
  /// Codes of the chunk committed last, n x r.
  const Matrix& last_codes() const { return last_codes_; }

 private:
  Engine() = default;

  ModelState state_;
  AccumStats stats_;
  EmbeddingTable embeddings_;
  CodeDatabase database_;
  Matrix last_codes_;
  bool in_round_ = false;
};

}  // namespace tagstream
