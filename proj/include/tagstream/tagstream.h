/* Copyright 2026 The tagstream Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the tagstream online hashing engine. Objects are opaque
 * handles owned by the caller and released with the matching *_destroy.
 * Every fallible call returns a ts_status; on failure ts_last_error() holds a
 * message for the calling thread until its next failing call.
 */
#ifndef TAGSTREAM_TAGSTREAM_H_
#define TAGSTREAM_TAGSTREAM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TAGSTREAM_BUILDING_LIBRARY)
#define TS_API __attribute__((visibility("default")))
#else
#define TS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
  TS_OK = 0,
  TS_ERR_CONFIG = 1,   /* bad argument, unknown key, invalid hyperparameter */
  TS_ERR_DATA = 2,     /* malformed or inconsistent input, shape mismatch */
  TS_ERR_NUMERIC = 3,  /* non-finite objective, degenerate kernel width */
  TS_ERR_STATE = 4,    /* call not valid for the engine's current state */
  TS_ERR_IO = 5,       /* file missing, unreadable or corrupt */
  TS_ERR_INTERNAL = 6
} ts_status;

typedef struct ts_config ts_config;
typedef struct ts_matrix ts_matrix;
typedef struct ts_manifest ts_manifest;
typedef struct ts_engine ts_engine;

typedef struct ts_engine_info {
  int32_t round;           /* committed rounds; 0 before the first chunk */
  int32_t bits;
  uint64_t total_seen;
  uint64_t feature_dim;
  uint64_t tag_count;
  uint64_t embedding_dim;
  uint64_t anchors;
  double kernel_width;
} ts_engine_info;

typedef struct ts_round_report {
  int32_t round;
  int32_t iterations;
  uint64_t samples;
  uint64_t tagless;
  double seconds;
} ts_round_report;

typedef struct ts_iteration_trace {
  double start, after_u, after_p, after_v, after_reweight, after_w, after_b;
  double l21;
  int32_t dcc_passes;
} ts_iteration_trace;

typedef struct ts_eval_report {
  int32_t round;
  double map;
  uint64_t evaluated;
  uint64_t excluded;
  uint64_t precision_k;
  double precision;
} ts_eval_report;

typedef struct ts_preprocess_report {
  uint64_t original_tags;
  uint64_t kept_tags;
  uint64_t pruned_rare;
  uint64_t pruned_unembeddable;
  uint64_t rows;
  uint64_t tagless_rows;
} ts_preprocess_report;

typedef struct ts_synthetic_spec {
  uint32_t clusters;
  uint32_t feature_dim;
  uint32_t tags_per_cluster;
  uint32_t rounds;
  uint32_t per_round;
  uint32_t queries;
  uint32_t embedding_dim;
  double center_spread;
  double noise;
  double flip_rate;
  double embedding_scale;
  uint64_t seed;
} ts_synthetic_spec;

TS_API const char* ts_version(void);
TS_API const char* ts_last_error(void);
TS_API const char* ts_status_name(ts_status status);

/* Configuration ---------------------------------------------------------- */

TS_API ts_status ts_config_create(ts_config** out);
TS_API ts_status ts_config_load(const char* path, ts_config** out);
TS_API void ts_config_destroy(ts_config* config);
TS_API ts_status ts_config_set(ts_config* config, const char* key, const char* value);
/* Copies the value (NUL terminated) into buf when it fits; *needed gets the
 * required size including the terminator. buf may be NULL when cap is 0. */
TS_API ts_status ts_config_get(const ts_config* config, const char* key, char* buf, size_t cap,
                               size_t* needed);
/* woh, woh-1 (no semantic term), woh-2 (also no tag regression), woh-3 (no
 * regularisation). */
TS_API ts_status ts_config_apply_variant(ts_config* config, const char* variant);

/* Matrices: dense row-major doubles ------------------------------------- */

TS_API ts_status ts_matrix_create(size_t rows, size_t cols, const double* data, ts_matrix** out);
TS_API ts_status ts_matrix_load_features(const char* path, ts_matrix** out);
/* 0/1 incidence, from sparse "row,col" pairs or a dense CSV. */
TS_API ts_status ts_matrix_load_incidence(const char* path, size_t rows, size_t cols,
                                          ts_matrix** out);
TS_API void ts_matrix_destroy(ts_matrix* matrix);
TS_API size_t ts_matrix_rows(const ts_matrix* matrix);
TS_API size_t ts_matrix_cols(const ts_matrix* matrix);
/* Row-major view, valid until the matrix is destroyed. */
TS_API const double* ts_matrix_data(const ts_matrix* matrix);

/* Dataset manifests ------------------------------------------------------ */

TS_API ts_status ts_manifest_load(const char* path, ts_manifest** out);
TS_API void ts_manifest_destroy(ts_manifest* manifest);
TS_API size_t ts_manifest_chunk_count(const ts_manifest* manifest);
TS_API void ts_manifest_dims(const ts_manifest* manifest, size_t* feature_dim, size_t* tag_count,
                             size_t* label_count);
TS_API ts_status ts_manifest_load_chunk(const ts_manifest* manifest, size_t index,
                                        ts_matrix** features, ts_matrix** tags);
/* Labels of the first `rows` database records, in stream order. */
TS_API ts_status ts_manifest_database_labels(const ts_manifest* manifest, size_t rows,
                                             ts_matrix** out);
/* Query set named by the manifest; fails with TS_ERR_CONFIG if absent. */
TS_API ts_status ts_manifest_queries(const ts_manifest* manifest, ts_matrix** features,
                                     ts_matrix** labels);

/* Drops tags seen fewer than min_count times or lacking an embedding and
 * writes the remapped dataset (with its own manifest.txt) to out_dir. */
TS_API ts_status ts_preprocess(const char* manifest_path, uint64_t min_count, const char* out_dir,
                               ts_preprocess_report* report);

/* Writes a clustered synthetic stream plus manifest.txt into dir. */
TS_API void ts_synthetic_defaults(ts_synthetic_spec* spec);
TS_API ts_status ts_synthetic_write(const ts_synthetic_spec* spec, const char* dir);

/* Engine ----------------------------------------------------------------- */

/* The embedding table comes from the manifest's vocab/embeddings files. */
TS_API ts_status ts_engine_create(const ts_config* config, const ts_manifest* manifest,
                                  ts_engine** out);
/* embeddings: one row per tag column. */
TS_API ts_status ts_engine_create_with_embeddings(const ts_config* config,
                                                  const ts_matrix* embeddings, ts_engine** out);
TS_API ts_status ts_engine_load(const char* path, ts_engine** out);
TS_API ts_status ts_engine_save(const ts_engine* engine, const char* path);
TS_API void ts_engine_destroy(ts_engine* engine);
TS_API ts_status ts_engine_get_info(const ts_engine* engine, ts_engine_info* out);

/* Learns codes for one chunk and commits it. ids may be NULL (running
 * record count). report may be NULL. On failure the engine is unchanged. */
TS_API ts_status ts_engine_train(ts_engine* engine, const ts_matrix* features,
                                 const ts_matrix* tags, const uint64_t* ids,
                                 ts_round_report* report);
/* Per-iteration objective values of the last round trained by this handle. */
TS_API ts_status ts_engine_trace(const ts_engine* engine, size_t iteration,
                                 ts_iteration_trace* out);

TS_API size_t ts_engine_words_per_code(const ts_engine* engine);
/* Packed codes, rows * words_per_code words; bit j of word w is bit
 * 64*w + j, set for +1. */
TS_API ts_status ts_engine_hash(const ts_engine* engine, const ts_matrix* queries,
                                uint64_t* words, size_t capacity);
/* Top-k database records for row `query_row` of `queries` by Hamming
 * distance, ties in insertion order. k = 0 returns nothing. *count gets
 * min(k, database size); at most `capacity` entries are written. */
TS_API ts_status ts_engine_query(const ts_engine* engine, const ts_matrix* queries,
                                 size_t query_row, size_t k, uint64_t* ids, uint32_t* distances,
                                 size_t capacity, size_t* count);
/* MAP over the full ranked list when map_cutoff is 0; precision@k skipped
 * when precision_k is 0. */
TS_API ts_status ts_engine_evaluate(const ts_engine* engine, const ts_matrix* query_features,
                                    const ts_matrix* query_labels,
                                    const ts_matrix* database_labels, size_t map_cutoff,
                                    size_t precision_k, ts_eval_report* out);

#ifdef __cplusplus
}
#endif

#endif /* TAGSTREAM_TAGSTREAM_H_ */
