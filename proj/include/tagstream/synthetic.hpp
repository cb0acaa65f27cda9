// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tagstream/io.hpp"
#include "tagstream/semantics.hpp"

namespace tagstream {

/// Gaussian-cluster stream with noisy cluster-derived tags. Cluster k owns
/// tags [k * tags_per_cluster, (k + 1) * tags_per_cluster); every entry of the
/// tag matrix is then flipped independently with probability `flip_rate`.
/// The cluster id is the single ground-truth label. Defaults give a stream
/// hard enough that a 200-sample first round is visibly worse than later ones.
struct ClusterStreamSpec {
  int clusters = 3;
  Index feature_dim = 32;
  Index tags_per_cluster = 3;
  int rounds = 4;
  Index per_round = 200;
  Index queries = 200;
  double center_spread = 0.38;  // stddev of cluster centers per coordinate
  double noise = 1.0;          // stddev of samples around their center
  double flip_rate = 0.1;
  Index embedding_dim = 16;
  // Tag vectors are scale * (topic of the owning cluster + 0.3 * noise),
  // topic ~ N(0, I).
  double embedding_scale = 30.0;
  std::uint64_t seed = 1;
};

struct ClusterStream {
  std::vector<Matrix> features;
  std::vector<TagChunk> tags;
  std::vector<TagChunk> labels;
  Matrix query_features;
  TagChunk query_labels;
  EmbeddingTable embeddings;  // tag_names double as the vocabulary

  Index tag_count() const { return embeddings.tags(); }
};

ClusterStream MakeClusterStream(const ClusterStreamSpec& spec);

/// Writes every chunk, the queries, vocabulary, embeddings and a manifest
/// ("manifest.txt") into `dir`; returns the manifest.
ChunkManifest WriteClusterStream(const ClusterStream& stream, const std::filesystem::path& dir);

}  // namespace tagstream
