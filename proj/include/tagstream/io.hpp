// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tagstream/codes.hpp"
#include "tagstream/model.hpp"
#include "tagstream/semantics.hpp"

namespace tagstream {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Feature matrices
//
// Binary layout: "WOHF", u32 n, u32 d (little-endian), then n*d float32
// row-major. Anything else is read as CSV with one sample per line.

Matrix LoadFeatures(const fs::path& path);
void SaveFeaturesBinary(const fs::path& path, const Matrix& features);
void SaveFeaturesCsv(const fs::path& path, const Matrix& features);

// ---------------------------------------------------------------------------
// Tag / label incidence
//
// Either sparse "row,column" pairs (0-based, one per line) or a dense 0/1
// CSV with one line per row. kAuto picks pairs when every line has two
// fields, except that with exactly two columns a file with one line per row
// is read as dense.

enum class IncidenceFormat { kAuto, kPairs, kDense };

TagChunk LoadIncidence(const fs::path& path, Index rows, Index cols,
                       IncidenceFormat format = IncidenceFormat::kAuto);
void SaveIncidencePairs(const fs::path& path, const TagChunk& incidence);

/// Per-column counts of set entries.
std::vector<Index> ColumnCounts(const TagChunk& incidence);

// ---------------------------------------------------------------------------
// Vocabulary and embeddings

/// One token per line; line i names column i.
std::vector<std::string> LoadVocab(const fs::path& path);
void SaveVocab(const fs::path& path, std::span<const std::string> vocab);

struct EmbeddingLoad {
  EmbeddingTable table;          // rows follow `columns`
  std::vector<Index> columns;    // vocab columns that have a vector, ascending
  std::vector<Index> missing;    // vocab columns without a vector
};

/// Text dump, one "token v1 ... vf" per line. An optional "count dim"
/// header line is skipped.
EmbeddingLoad LoadEmbeddings(const fs::path& path, std::span<const std::string> vocab);
void SaveEmbeddingsText(const fs::path& path, const EmbeddingTable& table);

struct VocabPruning {
  std::vector<Index> kept;   // surviving old columns, ascending
  std::vector<Index> remap;  // old column -> new column, -1 when pruned

  Index surviving() const { return static_cast<Index>(kept.size()); }
};

/// Keeps columns with count >= min_count that have an embedding.
VocabPruning PruneVocab(std::span<const Index> counts, Index min_count,
                        const std::vector<bool>& has_embedding);
TagChunk RemapColumns(const TagChunk& tags, const VocabPruning& pruning);

// ---------------------------------------------------------------------------
// Key = value text files (config and manifest)

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<KeyValue> ParseKeyValueFile(const fs::path& path);

struct ChunkEntry {
  fs::path features;
  fs::path tags;
  fs::path labels;  // empty when absent; evaluation only
};

/// Ordered chunk list plus dataset-wide declarations. Relative paths are
/// resolved against the manifest's directory on load.
struct ChunkManifest {
  Index feature_dim = 0;
  Index tag_count = 0;
  Index label_count = 0;
  fs::path vocab;
  fs::path embeddings;
  fs::path query_features;
  fs::path query_labels;
  std::vector<ChunkEntry> chunks;
};

ChunkManifest LoadManifest(const fs::path& path);
void SaveManifest(const fs::path& path, const ChunkManifest& manifest);

// ---------------------------------------------------------------------------
// Checkpoints

struct CodeDatabase {
  CodeBlock codes;
  std::vector<std::uint64_t> ids;
  std::vector<Index> round_sizes;
};

struct Checkpoint {
  ModelState state;
  AccumStats stats;
  EmbeddingTable embeddings;
  CodeDatabase database;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Versioned little-endian image with a trailing CRC-32; doubles are stored raw.
std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DeserializeCheckpoint(std::span<const std::uint8_t> bytes);

/// Writes to a temporary sibling and renames over `path`.
void SaveCheckpoint(const fs::path& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const fs::path& path);

// ---------------------------------------------------------------------------
// Metrics

struct MetricRow {
  int round = 0;
  int bits = 0;
  std::string metric;
  double value = 0.0;
};

/// CSV with header "round,bits,metric,value".
void WriteMetricsCsv(std::ostream& out, std::span<const MetricRow> rows);

/// Writes `bytes` to `path` via a temporary file and rename.
void WriteFileAtomic(const fs::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> ReadFileBytes(const fs::path& path);

}  // namespace tagstream
