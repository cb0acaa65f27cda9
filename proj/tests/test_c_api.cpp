// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#include <bit>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "tagstream/tagstream.h"

namespace fs = std::filesystem;

namespace {

fs::path Scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tagstream_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Dataset {
  ts_manifest* manifest = nullptr;
  ts_config* config = nullptr;
  fs::path dir;

  explicit Dataset(const std::string& name) : dir(Scratch(name)) {
    ts_synthetic_spec spec;
    ts_synthetic_defaults(&spec);
    spec.per_round = 60;
    spec.rounds = 3;
    spec.queries = 20;
    REQUIRE(ts_synthetic_write(&spec, dir.c_str()) == TS_OK);
    REQUIRE(ts_manifest_load((dir / "manifest.txt").c_str(), &manifest) == TS_OK);
    REQUIRE(ts_config_create(&config) == TS_OK);
    REQUIRE(ts_config_set(config, "anchors", "30") == TS_OK);
    REQUIRE(ts_config_set(config, "iters", "2") == TS_OK);
  }
  ~Dataset() {
    ts_manifest_destroy(manifest);
    ts_config_destroy(config);
  }
};

void TrainChunk(ts_engine* e, const ts_manifest* m, size_t i) {
  ts_matrix* x = nullptr;
  ts_matrix* y = nullptr;
  REQUIRE(ts_manifest_load_chunk(m, i, &x, &y) == TS_OK);
  ts_round_report r;
  CHECK(ts_engine_train(e, x, y, nullptr, &r) == TS_OK);
  CHECK(r.samples == 60);
  ts_matrix_destroy(x);
  ts_matrix_destroy(y);
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(ts_version()).size() > 0);
  CHECK(std::string(ts_status_name(TS_OK)) == "ok");
  CHECK(std::string(ts_status_name(TS_ERR_NUMERIC)) != std::string(ts_status_name(TS_ERR_DATA)));
}

TEST_CASE("config get/set through caller buffers") {
  ts_config* c = nullptr;
  REQUIRE(ts_config_create(&c) == TS_OK);
  size_t needed = 0;
  CHECK(ts_config_get(c, "alpha", nullptr, 0, &needed) == TS_OK);
  CHECK(needed == 4);  // "300" + NUL
  char buf[16];
  CHECK(ts_config_get(c, "alpha", buf, sizeof buf, &needed) == TS_OK);
  CHECK(std::string(buf) == "300");
  CHECK(ts_config_set(c, "colour", "red") == TS_ERR_CONFIG);
  CHECK(std::string(ts_last_error()).find("colour") != std::string::npos);
  CHECK(ts_config_apply_variant(c, "woh-2") == TS_OK);
  CHECK(ts_config_get(c, "theta", buf, sizeof buf, &needed) == TS_OK);
  CHECK(std::string(buf) == "0");
  CHECK(ts_config_apply_variant(c, "nope") == TS_ERR_CONFIG);
  CHECK(ts_config_set(nullptr, "alpha", "1") == TS_ERR_CONFIG);
  ts_config_destroy(c);
  CHECK(ts_config_load("/nonexistent/run.cfg", &c) != TS_OK);
}

TEST_CASE("matrices are row-major") {
  const double v[] = {1, 2, 3, 4, 5, 6};
  ts_matrix* m = nullptr;
  REQUIRE(ts_matrix_create(2, 3, v, &m) == TS_OK);
  CHECK(ts_matrix_rows(m) == 2);
  CHECK(ts_matrix_cols(m) == 3);
  CHECK(std::memcmp(ts_matrix_data(m), v, sizeof v) == 0);
  ts_matrix_destroy(m);
  CHECK(ts_matrix_load_features("/nonexistent.bin", &m) == TS_ERR_IO);
}

TEST_CASE("train, hash, query, evaluate and checkpoint through the C API") {
  Dataset d("flow");
  CHECK(ts_manifest_chunk_count(d.manifest) == 3);
  size_t f = 0, c = 0, l = 0;
  ts_manifest_dims(d.manifest, &f, &c, &l);
  CHECK(f == 32);
  CHECK(c == 9);
  CHECK(l == 3);

  ts_engine* e = nullptr;
  REQUIRE(ts_engine_create(d.config, d.manifest, &e) == TS_OK);
  ts_engine_info info;
  REQUIRE(ts_engine_get_info(e, &info) == TS_OK);
  CHECK(info.round == 0);
  TrainChunk(e, d.manifest, 0);
  TrainChunk(e, d.manifest, 1);
  REQUIRE(ts_engine_get_info(e, &info) == TS_OK);
  CHECK(info.round == 2);
  CHECK(info.total_seen == 120);
  CHECK(info.bits == 16);
  ts_iteration_trace trace;
  CHECK(ts_engine_trace(e, 1, &trace) == TS_OK);
  CHECK(trace.after_b <= trace.start + 1e-9);
  CHECK(ts_engine_trace(e, 2, &trace) != TS_OK);

  ts_matrix* qx = nullptr;
  ts_matrix* ql = nullptr;
  REQUIRE(ts_manifest_queries(d.manifest, &qx, &ql) == TS_OK);
  CHECK(ts_engine_words_per_code(e) == 1);
  std::vector<uint64_t> words(20);
  CHECK(ts_engine_hash(e, qx, words.data(), 19) == TS_ERR_CONFIG);
  REQUIRE(ts_engine_hash(e, qx, words.data(), words.size()) == TS_OK);

  // Every distance reported by a query is the popcount against a database
  // code, so the nearest hits of query 0 are non-decreasing and bounded.
  std::vector<uint64_t> ids(200);
  std::vector<uint32_t> dist(200);
  size_t count = 0;
  REQUIRE(ts_engine_query(e, qx, 0, 200, ids.data(), dist.data(), ids.size(), &count) == TS_OK);
  CHECK(count == 120);
  for (size_t i = 1; i < count; ++i) {
    CHECK(dist[i - 1] <= dist[i]);
    if (dist[i - 1] == dist[i]) CHECK(ids[i - 1] < ids[i]);
  }
  CHECK(dist[count - 1] <= 16);
  CHECK(ts_engine_query(e, qx, 0, 0, ids.data(), dist.data(), ids.size(), &count) == TS_OK);
  CHECK(count == 0);
  CHECK(ts_engine_query(e, qx, 20, 5, ids.data(), dist.data(), ids.size(), &count) != TS_OK);

  ts_matrix* db = nullptr;
  REQUIRE(ts_manifest_database_labels(d.manifest, 120, &db) == TS_OK);
  ts_eval_report report;
  REQUIRE(ts_engine_evaluate(e, qx, ql, db, 0, 10, &report) == TS_OK);
  CHECK(report.round == 2);
  CHECK(report.evaluated == 20);
  CHECK(report.map > 0.0);
  CHECK(report.map <= 1.0);

  const fs::path ckpt = d.dir / "model.tsck";
  REQUIRE(ts_engine_save(e, ckpt.c_str()) == TS_OK);
  ts_engine* back = nullptr;
  REQUIRE(ts_engine_load(ckpt.c_str(), &back) == TS_OK);
  std::vector<uint64_t> again(20);
  REQUIRE(ts_engine_hash(back, qx, again.data(), again.size()) == TS_OK);
  CHECK(again == words);
  TrainChunk(e, d.manifest, 2);
  TrainChunk(back, d.manifest, 2);
  REQUIRE(ts_engine_hash(e, qx, words.data(), words.size()) == TS_OK);
  REQUIRE(ts_engine_hash(back, qx, again.data(), again.size()) == TS_OK);
  CHECK(again == words);

  ts_matrix_destroy(qx);
  ts_matrix_destroy(ql);
  ts_matrix_destroy(db);
  ts_engine_destroy(back);
  ts_engine_destroy(e);
}

TEST_CASE("failures map to status codes and leave the engine unchanged") {
  Dataset d("errors");
  ts_engine* e = nullptr;
  REQUIRE(ts_engine_create(d.config, d.manifest, &e) == TS_OK);
  TrainChunk(e, d.manifest, 0);

  ts_matrix* x = nullptr;
  ts_matrix* y = nullptr;
  REQUIRE(ts_manifest_load_chunk(d.manifest, 1, &x, &y) == TS_OK);
  std::vector<double> bad(ts_matrix_data(x), ts_matrix_data(x) + 60 * 32);
  bad[5] = std::bit_cast<double>(0x7ff8000000000000ull);
  ts_matrix* nan = nullptr;
  REQUIRE(ts_matrix_create(60, 32, bad.data(), &nan) == TS_OK);
  CHECK(ts_engine_train(e, nan, y, nullptr, nullptr) == TS_ERR_NUMERIC);
  ts_matrix* narrow = nullptr;
  REQUIRE(ts_matrix_create(60, 4, bad.data(), &narrow) == TS_OK);
  CHECK(ts_engine_train(e, narrow, y, nullptr, nullptr) == TS_ERR_DATA);
  const std::vector<uint64_t> dup(60, 3);
  CHECK(ts_engine_train(e, x, y, dup.data(), nullptr) == TS_ERR_DATA);
  ts_engine_info info;
  REQUIRE(ts_engine_get_info(e, &info) == TS_OK);
  CHECK(info.round == 1);
  CHECK(info.total_seen == 60);

  const fs::path ckpt = d.dir / "m.tsck";
  REQUIRE(ts_engine_save(e, ckpt.c_str()) == TS_OK);
  ts_engine* back = nullptr;
  CHECK(ts_engine_load((d.dir / "missing.tsck").c_str(), &back) == TS_ERR_IO);
  {
    FILE* fp = std::fopen(ckpt.c_str(), "r+b");
    std::fseek(fp, 40, SEEK_SET);
    std::fputc(0x5a, fp);
    std::fclose(fp);
  }
  CHECK(ts_engine_load(ckpt.c_str(), &back) == TS_ERR_DATA);
  CHECK(back == nullptr);
  CHECK(ts_engine_train(nullptr, x, y, nullptr, nullptr) == TS_ERR_CONFIG);

  ts_matrix_destroy(x);
  ts_matrix_destroy(y);
  ts_matrix_destroy(nan);
  ts_matrix_destroy(narrow);
  ts_engine_destroy(e);
}

TEST_CASE("preprocess through the C API") {
  Dataset d("prep");
  ts_preprocess_report r;
  const fs::path out = d.dir / "clean";
  REQUIRE(ts_preprocess((d.dir / "manifest.txt").c_str(), 1, out.c_str(), &r) == TS_OK);
  CHECK(r.kept_tags == 9);
  CHECK(r.rows == 180);
  CHECK(fs::exists(out / "manifest.txt"));
  CHECK(ts_preprocess((d.dir / "nope.txt").c_str(), 1, out.c_str(), &r) != TS_OK);
}
