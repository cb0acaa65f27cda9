// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/tagstream.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "tagstream/config.hpp"
#include "tagstream/engine.hpp"
#include "tagstream/error.hpp"
#include "tagstream/pipeline.hpp"
#include "tagstream/synthetic.hpp"

namespace ts = tagstream;

struct ts_config {
  ts::RunConfig config;
};

struct ts_matrix {
  ts::Matrix values;
  std::optional<ts::TagChunk> incidence;  // set when loaded as incidence
  mutable std::vector<double> row_major;
  mutable bool row_major_ready = false;

  ts::TagChunk AsTags() const {
    return incidence ? *incidence : ts::TagChunk::FromDense(values);
  }
};

struct ts_manifest {
  ts::ChunkManifest manifest;
};

struct ts_engine {
  ts::Engine engine;
  std::vector<ts::IterationTrace> trace;
};

namespace {

thread_local std::string g_last_error;

ts_status StatusOf(ts::ErrorKind kind) {
  switch (kind) {
    case ts::ErrorKind::kConfig: return TS_ERR_CONFIG;
    case ts::ErrorKind::kShape: return TS_ERR_DATA;
    case ts::ErrorKind::kData: return TS_ERR_DATA;
    case ts::ErrorKind::kState: return TS_ERR_STATE;
    case ts::ErrorKind::kNumeric: return TS_ERR_NUMERIC;
    case ts::ErrorKind::kIo: return TS_ERR_IO;
  }
  return TS_ERR_INTERNAL;
}

ts_status Fail(ts_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
ts_status Guard(F&& body) {
  try {
    body();
    return TS_OK;
  } catch (const ts::Error& e) {
    return Fail(StatusOf(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(TS_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(TS_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return Fail(TS_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(TS_ERR_INTERNAL, "unknown exception");
  }
}

#define TS_REQUIRE(cond, what)                                          \
  do {                                                                  \
    if (!(cond)) return Fail(TS_ERR_CONFIG, std::string(what) + " is null"); \
  } while (0)

ts_matrix* Wrap(ts::Matrix values) {
  auto* m = new ts_matrix;
  m->values = std::move(values);
  return m;
}

ts_matrix* WrapTags(ts::TagChunk tags) {
  auto* m = new ts_matrix;
  m->values = tags.dense();
  m->incidence = std::move(tags);
  return m;
}

ts::Engine NewEngine(const ts::RunConfig& config, ts::EmbeddingTable table) {
  config.hyper.Validate();
  return ts::Engine(config.hyper, config.seed, std::move(table));
}

}  // namespace

extern "C" {

const char* ts_version(void) { return "0.1.0"; }

const char* ts_last_error(void) { return g_last_error.c_str(); }

const char* ts_status_name(ts_status status) {
  switch (status) {
    case TS_OK: return "ok";
    case TS_ERR_CONFIG: return "config";
    case TS_ERR_DATA: return "data";
    case TS_ERR_NUMERIC: return "numeric";
    case TS_ERR_STATE: return "state";
    case TS_ERR_IO: return "io";
    case TS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

ts_status ts_config_create(ts_config** out) {
  TS_REQUIRE(out, "out");
  return Guard([&] { *out = new ts_config; });
}

ts_status ts_config_load(const char* path, ts_config** out) {
  TS_REQUIRE(path, "path");
  TS_REQUIRE(out, "out");
  return Guard([&] { *out = new ts_config{ts::RunConfig::Load(path)}; });
}

void ts_config_destroy(ts_config* config) { delete config; }

ts_status ts_config_set(ts_config* config, const char* key, const char* value) {
  TS_REQUIRE(config, "config");
  TS_REQUIRE(key, "key");
  TS_REQUIRE(value, "value");
  return Guard([&] { config->config.Set(key, value); });
}

ts_status ts_config_get(const ts_config* config, const char* key, char* buf, size_t cap,
                        size_t* needed) {
  TS_REQUIRE(config, "config");
  TS_REQUIRE(key, "key");
  return Guard([&] {
    const std::string value = config->config.Get(key);
    if (needed) *needed = value.size() + 1;
    if (buf && cap > value.size()) std::memcpy(buf, value.c_str(), value.size() + 1);
  });
}

ts_status ts_config_apply_variant(ts_config* config, const char* variant) {
  TS_REQUIRE(config, "config");
  TS_REQUIRE(variant, "variant");
  return Guard([&] { config->config.ApplyVariant(variant); });
}

ts_status ts_matrix_create(size_t rows, size_t cols, const double* data, ts_matrix** out) {
  TS_REQUIRE(out, "out");
  if (rows * cols > 0) TS_REQUIRE(data, "data");
  return Guard([&] {
    ts::Matrix values(static_cast<ts::Index>(rows), static_cast<ts::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < cols; ++j) values(i, j) = data[i * cols + j];
    }
    *out = Wrap(std::move(values));
  });
}

ts_status ts_matrix_load_features(const char* path, ts_matrix** out) {
  TS_REQUIRE(path, "path");
  TS_REQUIRE(out, "out");
  return Guard([&] { *out = Wrap(ts::LoadFeatures(path)); });
}

ts_status ts_matrix_load_incidence(const char* path, size_t rows, size_t cols, ts_matrix** out) {
  TS_REQUIRE(path, "path");
  TS_REQUIRE(out, "out");
  return Guard([&] {
    *out = WrapTags(ts::LoadIncidence(path, static_cast<ts::Index>(rows),
                                      static_cast<ts::Index>(cols)));
  });
}

void ts_matrix_destroy(ts_matrix* matrix) { delete matrix; }

size_t ts_matrix_rows(const ts_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->values.rows()) : 0;
}

size_t ts_matrix_cols(const ts_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->values.cols()) : 0;
}

const double* ts_matrix_data(const ts_matrix* matrix) {
  if (!matrix) return nullptr;
  if (!matrix->row_major_ready) {
    const ts::RowMatrix rm = matrix->values;
    matrix->row_major.assign(rm.data(), rm.data() + rm.size());
    matrix->row_major_ready = true;
  }
  return matrix->row_major.data();
}

ts_status ts_manifest_load(const char* path, ts_manifest** out) {
  TS_REQUIRE(path, "path");
  TS_REQUIRE(out, "out");
  return Guard([&] { *out = new ts_manifest{ts::LoadManifest(path)}; });
}

void ts_manifest_destroy(ts_manifest* manifest) { delete manifest; }

size_t ts_manifest_chunk_count(const ts_manifest* manifest) {
  return manifest ? manifest->manifest.chunks.size() : 0;
}

void ts_manifest_dims(const ts_manifest* manifest, size_t* feature_dim, size_t* tag_count,
                      size_t* label_count) {
  if (!manifest) return;
  const auto& m = manifest->manifest;
  if (feature_dim) *feature_dim = static_cast<size_t>(m.feature_dim);
  if (tag_count) *tag_count = static_cast<size_t>(m.tag_count);
  if (label_count) *label_count = static_cast<size_t>(m.label_count);
}

ts_status ts_manifest_load_chunk(const ts_manifest* manifest, size_t index, ts_matrix** features,
                                 ts_matrix** tags) {
  TS_REQUIRE(manifest, "manifest");
  TS_REQUIRE(features, "features");
  TS_REQUIRE(tags, "tags");
  if (index >= manifest->manifest.chunks.size()) {
    return Fail(TS_ERR_CONFIG, "chunk index " + std::to_string(index) + " out of range");
  }
  return Guard([&] {
    ts::ChunkFiles chunk = ts::LoadChunk(manifest->manifest, index);
    ts_matrix* f = Wrap(std::move(chunk.features));
    *tags = WrapTags(std::move(chunk.tags));
    *features = f;
  });
}

ts_status ts_manifest_database_labels(const ts_manifest* manifest, size_t rows, ts_matrix** out) {
  TS_REQUIRE(manifest, "manifest");
  TS_REQUIRE(out, "out");
  return Guard([&] {
    *out = WrapTags(ts::LoadDatabaseLabels(manifest->manifest, static_cast<ts::Index>(rows)));
  });
}

ts_status ts_manifest_queries(const ts_manifest* manifest, ts_matrix** features,
                              ts_matrix** labels) {
  TS_REQUIRE(manifest, "manifest");
  TS_REQUIRE(features, "features");
  TS_REQUIRE(labels, "labels");
  const auto& m = manifest->manifest;
  if (m.query_features.empty() || m.query_labels.empty()) {
    return Fail(TS_ERR_CONFIG, "manifest names no query_features/query_labels");
  }
  return Guard([&] {
    ts::Matrix q = ts::LoadFeatures(m.query_features);
    ts::TagChunk l = ts::LoadIncidence(m.query_labels, q.rows(), m.label_count);
    ts_matrix* f = Wrap(std::move(q));
    *labels = WrapTags(std::move(l));
    *features = f;
  });
}

ts_status ts_preprocess(const char* manifest_path, uint64_t min_count, const char* out_dir,
                        ts_preprocess_report* report) {
  TS_REQUIRE(manifest_path, "manifest_path");
  TS_REQUIRE(out_dir, "out_dir");
  return Guard([&] {
    const auto r =
        ts::PreprocessDataset(manifest_path, static_cast<ts::Index>(min_count), out_dir);
    if (report) {
      report->original_tags = static_cast<uint64_t>(r.original_tags);
      report->kept_tags = static_cast<uint64_t>(r.kept_tags);
      report->pruned_rare = static_cast<uint64_t>(r.pruned_rare);
      report->pruned_unembeddable = static_cast<uint64_t>(r.pruned_unembeddable);
      report->rows = static_cast<uint64_t>(r.rows);
      report->tagless_rows = static_cast<uint64_t>(r.tagless_rows);
    }
  });
}

void ts_synthetic_defaults(ts_synthetic_spec* spec) {
  if (!spec) return;
  const ts::ClusterStreamSpec d;
  spec->clusters = static_cast<uint32_t>(d.clusters);
  spec->feature_dim = static_cast<uint32_t>(d.feature_dim);
  spec->tags_per_cluster = static_cast<uint32_t>(d.tags_per_cluster);
  spec->rounds = static_cast<uint32_t>(d.rounds);
  spec->per_round = static_cast<uint32_t>(d.per_round);
  spec->queries = static_cast<uint32_t>(d.queries);
  spec->embedding_dim = static_cast<uint32_t>(d.embedding_dim);
  spec->center_spread = d.center_spread;
  spec->noise = d.noise;
  spec->flip_rate = d.flip_rate;
  spec->embedding_scale = d.embedding_scale;
  spec->seed = d.seed;
}

ts_status ts_synthetic_write(const ts_synthetic_spec* spec, const char* dir) {
  TS_REQUIRE(spec, "spec");
  TS_REQUIRE(dir, "dir");
  return Guard([&] {
    ts::ClusterStreamSpec s;
    s.clusters = spec->clusters;
    s.feature_dim = spec->feature_dim;
    s.tags_per_cluster = spec->tags_per_cluster;
    s.rounds = spec->rounds;
    s.per_round = spec->per_round;
    s.queries = spec->queries;
    s.embedding_dim = spec->embedding_dim;
    s.center_spread = spec->center_spread;
    s.noise = spec->noise;
    s.flip_rate = spec->flip_rate;
    s.embedding_scale = spec->embedding_scale;
    s.seed = spec->seed;
    ts::WriteClusterStream(ts::MakeClusterStream(s), dir);
  });
}

ts_status ts_engine_create(const ts_config* config, const ts_manifest* manifest,
                           ts_engine** out) {
  TS_REQUIRE(config, "config");
  TS_REQUIRE(manifest, "manifest");
  TS_REQUIRE(out, "out");
  return Guard([&] {
    *out = new ts_engine{
        NewEngine(config->config, ts::LoadManifestEmbeddings(manifest->manifest)), {}};
  });
}

ts_status ts_engine_create_with_embeddings(const ts_config* config, const ts_matrix* embeddings,
                                           ts_engine** out) {
  TS_REQUIRE(config, "config");
  TS_REQUIRE(embeddings, "embeddings");
  TS_REQUIRE(out, "out");
  return Guard([&] {
    ts::EmbeddingTable table;
    table.vectors = embeddings->values;
    for (ts::Index i = 0; i < table.vectors.rows(); ++i) {
      table.tag_names.push_back("tag" + std::to_string(i));
    }
    *out = new ts_engine{NewEngine(config->config, std::move(table)), {}};
  });
}

ts_status ts_engine_load(const char* path, ts_engine** out) {
  TS_REQUIRE(path, "path");
  TS_REQUIRE(out, "out");
  return Guard([&] { *out = new ts_engine{ts::Engine::Load(path), {}}; });
}

ts_status ts_engine_save(const ts_engine* engine, const char* path) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(path, "path");
  return Guard([&] { engine->engine.Save(path); });
}

void ts_engine_destroy(ts_engine* engine) { delete engine; }

ts_status ts_engine_get_info(const ts_engine* engine, ts_engine_info* out) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(out, "out");
  const ts::ModelState& s = engine->engine.state();
  out->round = s.round;
  out->bits = s.hyper.bits;
  out->total_seen = static_cast<uint64_t>(s.total_seen);
  out->feature_dim = static_cast<uint64_t>(s.feature_dim);
  out->tag_count = static_cast<uint64_t>(s.tag_count);
  out->embedding_dim = static_cast<uint64_t>(s.embedding_dim);
  out->anchors = static_cast<uint64_t>(s.anchors.count());
  out->kernel_width = s.anchors.kernel_width;
  return TS_OK;
}

ts_status ts_engine_train(ts_engine* engine, const ts_matrix* features, const ts_matrix* tags,
                          const uint64_t* ids, ts_round_report* report) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(features, "features");
  TS_REQUIRE(tags, "tags");
  return Guard([&] {
    std::span<const std::uint64_t> id_span;
    if (ids) id_span = {ids, static_cast<size_t>(features->values.rows())};
    ts::RoundOptions options;
    options.step_trace = true;
    ts::RoundReport r = engine->engine.Train(features->values, tags->AsTags(), id_span, options);
    engine->trace = std::move(r.trace);
    if (report) {
      report->round = r.round;
      report->iterations = static_cast<int32_t>(engine->trace.size());
      report->samples = static_cast<uint64_t>(r.samples);
      report->tagless = static_cast<uint64_t>(r.tagless);
      report->seconds = r.seconds;
    }
  });
}

ts_status ts_engine_trace(const ts_engine* engine, size_t iteration, ts_iteration_trace* out) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(out, "out");
  if (iteration >= engine->trace.size()) {
    return Fail(TS_ERR_STATE, "no trace for iteration " + std::to_string(iteration));
  }
  const ts::IterationTrace& t = engine->trace[iteration];
  *out = {t.start, t.after_u, t.after_p, t.after_v, t.after_reweight, t.after_w, t.after_b,
          t.l21, t.dcc_passes};
  return TS_OK;
}

size_t ts_engine_words_per_code(const ts_engine* engine) {
  return engine ? static_cast<size_t>(ts::WordsPerCode(engine->engine.state().hyper.bits)) : 0;
}

ts_status ts_engine_hash(const ts_engine* engine, const ts_matrix* queries, uint64_t* words,
                         size_t capacity) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(queries, "queries");
  return Guard([&] {
    const ts::CodeBlock codes = engine->engine.Hash(queries->values);
    const auto& all = codes.words();
    if (all.size() > capacity) {
      throw ts::ConfigError("hash needs " + std::to_string(all.size()) +
                            " words, buffer holds " + std::to_string(capacity));
    }
    std::copy(all.begin(), all.end(), words);
  });
}

ts_status ts_engine_query(const ts_engine* engine, const ts_matrix* queries, size_t query_row,
                          size_t k, uint64_t* ids, uint32_t* distances, size_t capacity,
                          size_t* count) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(queries, "queries");
  TS_REQUIRE(count, "count");
  if (query_row >= static_cast<size_t>(queries->values.rows())) {
    return Fail(TS_ERR_CONFIG, "query row " + std::to_string(query_row) + " out of range");
  }
  return Guard([&] {
    *count = 0;
    if (k == 0) return;
    const ts::Matrix one = queries->values.row(static_cast<ts::Index>(query_row));
    const ts::CodeBlock code = engine->engine.Hash(one);
    const ts::RetrievalIndex index = engine->engine.Snapshot();
    const auto hits = ts::HammingRank(code.Code(0), code.bits(), index, static_cast<ts::Index>(k));
    *count = hits.size();
    const size_t n = std::min(hits.size(), capacity);
    for (size_t i = 0; i < n; ++i) {
      if (ids) ids[i] = hits[i].id;
      if (distances) distances[i] = static_cast<uint32_t>(hits[i].distance);
    }
  });
}

ts_status ts_engine_evaluate(const ts_engine* engine, const ts_matrix* query_features,
                             const ts_matrix* query_labels, const ts_matrix* database_labels,
                             size_t map_cutoff, size_t precision_k, ts_eval_report* out) {
  TS_REQUIRE(engine, "engine");
  TS_REQUIRE(query_features, "query_features");
  TS_REQUIRE(query_labels, "query_labels");
  TS_REQUIRE(database_labels, "database_labels");
  TS_REQUIRE(out, "out");
  return Guard([&] {
    std::optional<ts::Index> cutoff;
    if (map_cutoff > 0) cutoff = static_cast<ts::Index>(map_cutoff);
    const ts::EvalReport r =
        ts::Evaluate(engine->engine, query_features->values, query_labels->AsTags(),
                     database_labels->AsTags(), cutoff, static_cast<ts::Index>(precision_k));
    out->round = r.round;
    out->map = r.map.map;
    out->evaluated = static_cast<uint64_t>(r.map.evaluated);
    out->excluded = static_cast<uint64_t>(r.map.excluded);
    out->precision_k = static_cast<uint64_t>(r.precision_k);
    out->precision = r.precision;
  });
}

}  // extern "C"
