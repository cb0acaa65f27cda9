// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "tagstream/error.hpp"
#include "tagstream/pipeline.hpp"
#include "tagstream/synthetic.hpp"

using namespace tagstream;

namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Adds one rare tag and one tag without an embedding to a written stream.
std::filesystem::path WriteNoisyDataset(const std::filesystem::path& dir) {
  ClusterStreamSpec spec;
  spec.per_round = 40;
  spec.rounds = 2;
  spec.queries = 10;
  ClusterStream s = MakeClusterStream(spec);
  WriteClusterStream(s, dir);
  {
    std::ofstream vocab(dir / "vocab.txt", std::ios::app);
    vocab << "rare\nd200\n";
  }
  {
    std::ofstream emb(dir / "embeddings.txt", std::ios::app);
    emb << "rare";
    for (Index j = 0; j < s.embeddings.dim(); ++j) emb << " 0.5";
    emb << "\n";
  }
  {
    std::ofstream t0(dir / "chunk0.tags", std::ios::app);
    t0 << "0,9\n";  // rare: once
    for (int i = 0; i < 40; ++i) t0 << i << ",10\n";  // d200: frequent, unembeddable
  }
  std::string manifest = Slurp(dir / "manifest.txt");
  const auto pos = manifest.find("tag_count = 9");
  manifest.replace(pos, 13, "tag_count = 11");
  std::ofstream(dir / "manifest.txt") << manifest;
  return dir / "manifest.txt";
}

}  // namespace

TEST_CASE("preprocessing prunes rare and unembeddable tags and is idempotent") {
  const auto dir = testing::ScratchDir("pipeline_prep");
  const auto manifest = WriteNoisyDataset(dir / "raw");
  const PreprocessReport r = PreprocessDataset(manifest, 5, dir / "once");
  CHECK(r.original_tags == 11);
  CHECK(r.kept_tags == 9);
  CHECK(r.pruned_rare == 1);
  CHECK(r.pruned_unembeddable == 1);
  CHECK(r.rows == 80);

  const ChunkManifest once = LoadManifest(r.manifest);
  CHECK(once.tag_count == 9);
  CHECK(LoadVocab(once.vocab).size() == 9);
  CHECK(LoadManifestEmbeddings(once).tags() == 9);

  const PreprocessReport again = PreprocessDataset(r.manifest, 5, dir / "twice");
  CHECK(again.kept_tags == 9);
  CHECK(again.pruned_rare == 0);
  CHECK(again.pruned_unembeddable == 0);
  for (const char* f : {"vocab.txt", "embeddings.txt", "chunk0.tags", "chunk1.tags"}) {
    CHECK(Slurp(dir / "once" / f) == Slurp(dir / "twice" / f));
  }
}

TEST_CASE("manifests with unembeddable tags must be preprocessed before training") {
  const auto dir = testing::ScratchDir("pipeline_raw");
  const auto manifest = WriteNoisyDataset(dir);
  CHECK_THROWS_AS(LoadManifestEmbeddings(LoadManifest(manifest)), Error);
  CHECK_THROWS_AS(PreprocessDataset(manifest, 100000, dir / "none"), Error);
}

TEST_CASE("manifest-driven training and evaluation") {
  const auto dir = testing::ScratchDir("pipeline_eval");
  ClusterStreamSpec spec;
  spec.per_round = 60;
  spec.queries = 20;
  const ClusterStream s = MakeClusterStream(spec);
  const ChunkManifest m = WriteClusterStream(s, dir);
  const ChunkManifest loaded = LoadManifest(dir / "manifest.txt");
  CHECK(FeatureRowCount(loaded.chunks[0].features) == 60);

  Hyperparams h;
  h.anchors = 30;
  h.iterations = 2;
  Engine e(h, 1, LoadManifestEmbeddings(loaded));
  for (std::size_t i = 0; i < 2; ++i) {
    const ChunkFiles c = LoadChunk(loaded, i);
    CHECK(c.features == testing::RoundToFloat(s.features[i]));  // files hold float32
    e.Train(c.features, c.tags);
  }
  const TagChunk db = LoadDatabaseLabels(loaded, 120);
  CHECK(db.rows() == 120);
  CHECK(db.TagsOf(70) == s.labels[1].TagsOf(10));
  CHECK_THROWS_AS(LoadDatabaseLabels(loaded, 1000), Error);

  const EvalReport r = Evaluate(e, s.query_features, s.query_labels, db, std::nullopt, 10);
  CHECK(r.round == 2);
  CHECK(r.map.evaluated == 20);
  CHECK(r.map.map > 0.0);
  CHECK(r.precision_k == 10);
  CHECK_THROWS_AS(Evaluate(e, s.query_features, s.query_labels, LoadDatabaseLabels(loaded, 60),
                           std::nullopt, 0),
                  Error);
}
