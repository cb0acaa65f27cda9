// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/synthetic.hpp"

#include <random>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {
namespace {

Matrix Gaussian(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

struct Draw {
  Matrix x;
  std::vector<int> cluster;
};

Draw Sample(const Matrix& centers, Index n, double noise, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(centers.rows()) - 1);
  std::normal_distribution<double> g(0.0, noise);
  Draw d;
  d.x.resize(n, centers.cols());
  d.cluster.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int k = pick(rng);
    d.cluster[static_cast<std::size_t>(i)] = k;
    for (Index j = 0; j < centers.cols(); ++j) d.x(i, j) = centers(k, j) + g(rng);
  }
  return d;
}

TagChunk LabelsOf(const std::vector<int>& cluster, int clusters) {
  std::vector<std::pair<Index, Index>> pairs;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    pairs.emplace_back(static_cast<Index>(i), cluster[i]);
  }
  return TagChunk::FromPairs(static_cast<Index>(cluster.size()), clusters, pairs);
}

}  // namespace

ClusterStream MakeClusterStream(const ClusterStreamSpec& spec) {
  if (spec.clusters < 1 || spec.rounds < 1 || spec.per_round < 1 || spec.tags_per_cluster < 1 ||
      spec.feature_dim < 1 || spec.embedding_dim < 1) {
    throw ConfigError("synthetic stream sizes must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  const Index c = spec.clusters * spec.tags_per_cluster;
  const Matrix centers = Gaussian(spec.clusters, spec.feature_dim, spec.center_spread, rng);

  ClusterStream out;
  const Matrix topic = Gaussian(spec.clusters, spec.embedding_dim, 1.0, rng);
  out.embeddings.vectors.resize(c, spec.embedding_dim);
  for (Index t = 0; t < c; ++t) {
    out.embeddings.vectors.row(t) =
        spec.embedding_scale *
        (topic.row(t / spec.tags_per_cluster) + Gaussian(1, spec.embedding_dim, 0.3, rng));
    out.embeddings.tag_names.push_back("tag" + std::to_string(t));
  }

  std::bernoulli_distribution flip(spec.flip_rate);
  for (int r = 0; r < spec.rounds; ++r) {
    Draw d = Sample(centers, spec.per_round, spec.noise, rng);
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < spec.per_round; ++i) {
      const int k = d.cluster[static_cast<std::size_t>(i)];
      for (Index t = 0; t < c; ++t) {
        const bool owned = t / spec.tags_per_cluster == k;
        if (owned != flip(rng)) pairs.emplace_back(i, t);
      }
    }
    out.tags.push_back(TagChunk::FromPairs(spec.per_round, c, pairs));
    out.labels.push_back(LabelsOf(d.cluster, spec.clusters));
    out.features.push_back(std::move(d.x));
  }
  Draw q = Sample(centers, spec.queries, spec.noise, rng);
  out.query_labels = LabelsOf(q.cluster, spec.clusters);
  out.query_features = std::move(q.x);
  return out;
}

ChunkManifest WriteClusterStream(const ClusterStream& stream, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ChunkManifest m;
  m.feature_dim = stream.query_features.cols();
  m.tag_count = stream.tag_count();
  m.label_count = stream.query_labels.cols();
  m.vocab = "vocab.txt";
  m.embeddings = "embeddings.txt";
  m.query_features = "queries.bin";
  m.query_labels = "query_labels.txt";
  SaveVocab(dir / m.vocab, stream.embeddings.tag_names);
  SaveEmbeddingsText(dir / m.embeddings, stream.embeddings);
  SaveFeaturesBinary(dir / m.query_features, stream.query_features);
  SaveIncidencePairs(dir / m.query_labels, stream.query_labels);
  for (std::size_t r = 0; r < stream.features.size(); ++r) {
    const std::string stem = "chunk" + std::to_string(r);
    ChunkEntry e{stem + ".bin", stem + ".tags", stem + ".labels"};
    SaveFeaturesBinary(dir / e.features, stream.features[r]);
    SaveIncidencePairs(dir / e.tags, stream.tags[r]);
    SaveIncidencePairs(dir / e.labels, stream.labels[r]);
    m.chunks.push_back(std::move(e));
  }
  SaveManifest(dir / "manifest.txt", m);
  // Callers get paths usable from any working directory.
  for (auto* p : {&m.vocab, &m.embeddings, &m.query_features, &m.query_labels}) *p = dir / *p;
  for (auto& e : m.chunks) {
    e.features = dir / e.features;
    e.tags = dir / e.tags;
    e.labels = dir / e.labels;
  }
  return m;
}

}  // namespace tagstream
