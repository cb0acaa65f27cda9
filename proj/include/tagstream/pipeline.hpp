// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>

#include "tagstream/engine.hpp"
#include "tagstream/evaluation.hpp"
#include "tagstream/io.hpp"

namespace tagstream {

struct PreprocessReport {
  Index original_tags = 0;
  Index kept_tags = 0;
  Index pruned_rare = 0;           // below min_count (whether or not embeddable)
  Index pruned_unembeddable = 0;   // frequent enough but without a vector
  Index rows = 0;
  Index tagless_rows = 0;          // rows left with no tag after remapping
  std::filesystem::path manifest;  // written manifest
};

/// Counts tags over every chunk of the manifest, drops rare and
/// unembeddable columns, and writes a remapped dataset to `out_dir`
/// (tags, vocabulary, embeddings, manifest). Features and labels are
/// referenced in place.
PreprocessReport PreprocessDataset(const std::filesystem::path& manifest_path, Index min_count,
                                   const std::filesystem::path& out_dir);

/// Embedding table aligned with the manifest's tag columns. Fails if any
/// column lacks a vector; such datasets need preprocessing first.
EmbeddingTable LoadManifestEmbeddings(const ChunkManifest& manifest);

struct ChunkFiles {
  Matrix features;
  TagChunk tags;
};

ChunkFiles LoadChunk(const ChunkManifest& manifest, std::size_t index);

/// Ground-truth labels of the first `rows` database records, read from the
/// chunks' label files in order.
TagChunk LoadDatabaseLabels(const ChunkManifest& manifest, Index rows);

/// Row count of a feature file, reading only the header for binary files.
Index FeatureRowCount(const std::filesystem::path& path);

struct EvalReport {
  int round = 0;
  MapReport map;
  Index precision_k = 0;
  double precision = 0.0;
};

EvalReport Evaluate(const Engine& engine, const Matrix& query_features,
                    const TagChunk& query_labels, const TagChunk& database_labels,
                    std::optional<Index> map_cutoff, Index precision_k);

}  // namespace tagstream
