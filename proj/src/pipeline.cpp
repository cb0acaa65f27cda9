// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/pipeline.hpp"

#include <fstream>
#include <string>

#include "tagstream/error.hpp"

namespace tagstream {

Index FeatureRowCount(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), 8);
  if (in.gcount() == 8 && head[0] == 'W' && head[1] == 'O' && head[2] == 'H' && head[3] == 'F') {
    return static_cast<Index>(head[4]) | static_cast<Index>(head[5]) << 8 |
           static_cast<Index>(head[6]) << 16 | static_cast<Index>(head[7]) << 24;
  }
  return LoadFeatures(path).rows();
}

PreprocessReport PreprocessDataset(const std::filesystem::path& manifest_path, Index min_count,
                                   const std::filesystem::path& out_dir) {
  const ChunkManifest in = LoadManifest(manifest_path);
  if (in.vocab.empty() || in.embeddings.empty()) {
    throw ConfigError("preprocessing needs 'vocab' and 'embeddings' in the manifest");
  }
  const auto vocab = LoadVocab(in.vocab);
  if (static_cast<Index>(vocab.size()) != in.tag_count) {
    throw DataError(in.vocab.string() + " lists " + std::to_string(vocab.size()) +
                    " tokens but the manifest declares " + std::to_string(in.tag_count) + " tags");
  }
  const EmbeddingLoad emb = LoadEmbeddings(in.embeddings, vocab);

  std::vector<Index> counts(static_cast<std::size_t>(in.tag_count), 0);
  std::vector<TagChunk> chunks;
  for (const auto& entry : in.chunks) {
    const Index rows = FeatureRowCount(entry.features);
    chunks.push_back(LoadIncidence(entry.tags, rows, in.tag_count));
    const auto c = ColumnCounts(chunks.back());
    for (std::size_t j = 0; j < c.size(); ++j) counts[j] += c[j];
  }
  std::vector<bool> has_embedding(counts.size(), false);
  for (Index col : emb.columns) has_embedding[static_cast<std::size_t>(col)] = true;
  const VocabPruning pruning = PruneVocab(counts, min_count, has_embedding);

  PreprocessReport report;
  report.original_tags = in.tag_count;
  report.kept_tags = pruning.surviving();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < min_count) ++report.pruned_rare;
    else if (!has_embedding[j]) ++report.pruned_unembeddable;
  }

  std::filesystem::create_directories(out_dir);
  ChunkManifest out = in;
  out.tag_count = pruning.surviving();
  out.vocab = std::filesystem::absolute(out_dir / "vocab.txt");
  out.embeddings = std::filesystem::absolute(out_dir / "embeddings.txt");
  for (auto* p : {&out.query_features, &out.query_labels}) {
    if (!p->empty()) *p = std::filesystem::absolute(*p);
  }
  EmbeddingTable kept;
  kept.vectors.resize(pruning.surviving(), emb.table.dim());
  // emb.table rows follow emb.columns; find each kept column's row.
  std::vector<Index> row_of(counts.size(), -1);
  for (std::size_t i = 0; i < emb.columns.size(); ++i) {
    row_of[static_cast<std::size_t>(emb.columns[i])] = static_cast<Index>(i);
  }
  for (Index i = 0; i < pruning.surviving(); ++i) {
    const Index col = pruning.kept[static_cast<std::size_t>(i)];
    kept.vectors.row(i) = emb.table.vectors.row(row_of[static_cast<std::size_t>(col)]);
    kept.tag_names.push_back(vocab[static_cast<std::size_t>(col)]);
  }
  SaveVocab(out.vocab, kept.tag_names);
  SaveEmbeddingsText(out.embeddings, kept);

  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const TagChunk remapped = RemapColumns(chunks[i], pruning);
    report.rows += remapped.rows();
    for (Index r = 0; r < remapped.rows(); ++r) report.tagless_rows += remapped.TagCount(r) == 0;
    const auto tags_path = std::filesystem::absolute(out_dir / ("chunk" + std::to_string(i) + ".tags"));
    SaveIncidencePairs(tags_path, remapped);
    auto& entry = out.chunks[i];
    entry.tags = tags_path;
    entry.features = std::filesystem::absolute(entry.features);
    if (!entry.labels.empty()) entry.labels = std::filesystem::absolute(entry.labels);
  }
  report.manifest = out_dir / "manifest.txt";
  SaveManifest(report.manifest, out);
  return report;
}

EmbeddingTable LoadManifestEmbeddings(const ChunkManifest& manifest) {
  if (manifest.vocab.empty() || manifest.embeddings.empty()) {
    throw ConfigError("manifest must name 'vocab' and 'embeddings'");
  }
  const auto vocab = LoadVocab(manifest.vocab);
  if (static_cast<Index>(vocab.size()) != manifest.tag_count) {
    throw DataError(manifest.vocab.string() + " lists " + std::to_string(vocab.size()) +
                    " tokens but the manifest declares " + std::to_string(manifest.tag_count));
  }
  EmbeddingLoad emb = LoadEmbeddings(manifest.embeddings, vocab);
  if (!emb.missing.empty()) {
    throw DataError(std::to_string(emb.missing.size()) + " tags (first: '" +
                    vocab[static_cast<std::size_t>(emb.missing.front())] +
                    "') have no embedding; run preprocess first");
  }
  return std::move(emb.table);
}

ChunkFiles LoadChunk(const ChunkManifest& manifest, std::size_t index) {
  const ChunkEntry& entry = manifest.chunks.at(index);
  ChunkFiles out;
  out.features = LoadFeatures(entry.features);
  if (manifest.feature_dim != 0 && out.features.cols() != manifest.feature_dim) {
    throw DataError(entry.features.string() + " has " + std::to_string(out.features.cols()) +
                    " columns, manifest declares " + std::to_string(manifest.feature_dim));
  }
  out.tags = LoadIncidence(entry.tags, out.features.rows(), manifest.tag_count);
  return out;
}

TagChunk LoadDatabaseLabels(const ChunkManifest& manifest, Index rows) {
  if (manifest.label_count < 1) throw ConfigError("manifest declares no label_count");
  std::vector<std::pair<Index, Index>> pairs;
  Index offset = 0;
  for (const auto& entry : manifest.chunks) {
    if (offset >= rows) break;
    if (entry.labels.empty()) {
      throw ConfigError("chunk " + entry.features.string() + " has no label file");
    }
    const Index n = FeatureRowCount(entry.features);
    const TagChunk labels = LoadIncidence(entry.labels, n, manifest.label_count);
    for (Index i = 0; i < n; ++i) {
      for (Index l : labels.TagsOf(i)) pairs.emplace_back(offset + i, l);
    }
    offset += n;
  }
  if (offset < rows) {
    throw DataError("manifest labels cover " + std::to_string(offset) + " records, need " +
                    std::to_string(rows));
  }
  std::erase_if(pairs, [rows](const auto& p) { return p.first >= rows; });
  return TagChunk::FromPairs(rows, manifest.label_count, pairs);
}

EvalReport Evaluate(const Engine& engine, const Matrix& query_features,
                    const TagChunk& query_labels, const TagChunk& database_labels,
                    std::optional<Index> map_cutoff, Index precision_k) {
  if (query_labels.rows() != query_features.rows()) {
    throw ShapeError("query features and labels disagree on the number of rows");
  }
  const RetrievalIndex index = engine.Snapshot();
  if (database_labels.rows() != index.size()) {
    throw ShapeError("database labels cover " + std::to_string(database_labels.rows()) +
                     " records, index holds " + std::to_string(index.size()));
  }
  const CodeBlock queries = engine.Hash(query_features);
  const Judgments judgments = Judgments::FromIncidence(query_labels, database_labels);
  EvalReport out;
  out.round = index.model_round;
  out.map = MeanAveragePrecision(queries, index, judgments, map_cutoff);
  if (precision_k > 0) {
    out.precision_k = precision_k;
    out.precision = MeanPrecisionAt(queries, index, judgments, precision_k);
  }
  return out;
}

}  // namespace tagstream
