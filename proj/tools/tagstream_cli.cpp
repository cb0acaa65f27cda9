// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tagstream/tagstream.h"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Failure {
  ts_status status;
  std::string message;
};

void Check(ts_status status, const std::string& context) {
  if (status != TS_OK) throw Failure{status, context + ": " + ts_last_error()};
}

int ExitFor(ts_status status) {
  switch (status) {
    case TS_OK: return kOk;
    case TS_ERR_CONFIG: return kUsage;
    case TS_ERR_NUMERIC: return kNumeric;
    default: return kData;
  }
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Config = std::unique_ptr<ts_config, Deleter<ts_config, ts_config_destroy>>;
using MatrixPtr = std::unique_ptr<ts_matrix, Deleter<ts_matrix, ts_matrix_destroy>>;
using Manifest = std::unique_ptr<ts_manifest, Deleter<ts_manifest, ts_manifest_destroy>>;
using EnginePtr = std::unique_ptr<ts_engine, Deleter<ts_engine, ts_engine_destroy>>;

std::string ConfigValue(const ts_config* config, const char* key) {
  size_t needed = 0;
  Check(ts_config_get(config, key, nullptr, 0, &needed), key);
  std::string out(needed, '\0');
  Check(ts_config_get(config, key, out.data(), out.size(), &needed), key);
  out.resize(needed - 1);
  return out;
}

std::string FormatValue(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

struct MetricsWriter {
  std::vector<std::string> rows;
  void Add(int round, int bits, const std::string& metric, double value) {
    rows.push_back(std::to_string(round) + "," + std::to_string(bits) + "," + metric + "," +
                   FormatValue(value));
  }
  void Write(const std::string& path) const {
    if (path.empty()) return;
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      out << "round,bits,metric,value\n";
      for (const auto& r : rows) out << r << "\n";
      if (!out) throw Failure{TS_ERR_IO, "cannot write " + path};
    }
    std::filesystem::rename(tmp, path);
  }
};

// Options shared by commands that build or tune a model.
struct ModelFlags {
  std::string config_path;
  std::string manifest;
  std::map<std::string, std::string> overrides;
  std::string variant;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file");
    cmd->add_option("--manifest", manifest, "dataset manifest");
    for (const auto& [flag, key] :
         std::vector<std::pair<std::string, std::string>>{{"--bits", "bits"},
                                                          {"--seed", "seed"},
                                                          {"--alpha", "alpha"},
                                                          {"--beta", "beta"},
                                                          {"--theta", "theta"},
                                                          {"--mu", "mu"},
                                                          {"--iters", "iters"},
                                                          {"--dcc-sweeps", "dcc_sweeps"},
                                                          {"--anchors", "anchors"},
                                                          {"--min-count", "min_count"},
                                                          {"--map-cutoff", "map_cutoff"},
                                                          {"--checkpoint", "checkpoint"},
                                                          {"--metrics", "metrics"},
                                                          {"--timing", "timing"}}) {
      cmd->add_option_function<std::string>(
          flag, [this, key = key](const std::string& v) { overrides[key] = v; });
    }
  }

  Config Build() const {
    ts_config* raw = nullptr;
    if (config_path.empty()) {
      Check(ts_config_create(&raw), "config");
    } else {
      Check(ts_config_load(config_path.c_str(), &raw), config_path);
    }
    Config config(raw);
    if (!manifest.empty()) Check(ts_config_set(raw, "manifest", manifest.c_str()), "--manifest");
    for (const auto& [key, value] : overrides) {
      Check(ts_config_set(raw, key.c_str(), value.c_str()), "--" + key);
    }
    if (!variant.empty()) Check(ts_config_apply_variant(raw, variant.c_str()), "--variant");
    return config;
  }
};

Manifest OpenManifest(const ts_config* config) {
  const std::string path = ConfigValue(config, "manifest");
  if (path.empty()) throw Failure{TS_ERR_CONFIG, "no manifest given (--manifest or config)"};
  ts_manifest* raw = nullptr;
  Check(ts_manifest_load(path.c_str(), &raw), path);
  Manifest m(raw);
  if (ts_manifest_chunk_count(raw) == 0) throw Failure{TS_ERR_CONFIG, path + " lists no chunks"};
  return m;
}

struct QuerySet {
  MatrixPtr features;
  MatrixPtr labels;
};

// Query paths from the config win over the manifest's.
std::optional<QuerySet> OpenQueries(const ts_config* config, const ts_manifest* manifest,
                                    bool required) {
  const std::string qf = ConfigValue(config, "query_features");
  const std::string ql = ConfigValue(config, "query_labels");
  ts_matrix* f = nullptr;
  ts_matrix* l = nullptr;
  if (!qf.empty() || !ql.empty()) {
    if (qf.empty() || ql.empty()) {
      throw Failure{TS_ERR_CONFIG, "query_features and query_labels must be given together"};
    }
    size_t labels = 0;
    ts_manifest_dims(manifest, nullptr, nullptr, &labels);
    Check(ts_matrix_load_features(qf.c_str(), &f), qf);
    MatrixPtr features(f);
    Check(ts_matrix_load_incidence(ql.c_str(), ts_matrix_rows(f), labels, &l), ql);
    return QuerySet{std::move(features), MatrixPtr(l)};
  }
  const ts_status s = ts_manifest_queries(manifest, &f, &l);
  if (s == TS_ERR_CONFIG && !required) return std::nullopt;
  Check(s, "queries");
  return QuerySet{MatrixPtr(f), MatrixPtr(l)};
}

size_t MapCutoff(const ts_config* config) {
  const std::string v = ConfigValue(config, "map_cutoff");
  return v.empty() ? 0 : std::stoul(v);
}

ts_eval_report EvaluateEngine(const ts_engine* engine, const ts_manifest* manifest,
                              const QuerySet& queries, size_t cutoff, size_t precision_k) {
  ts_engine_info info{};
  Check(ts_engine_get_info(engine, &info), "engine");
  ts_matrix* db = nullptr;
  Check(ts_manifest_database_labels(manifest, info.total_seen, &db), "database labels");
  MatrixPtr db_labels(db);
  ts_eval_report report{};
  Check(ts_engine_evaluate(engine, queries.features.get(), queries.labels.get(), db, cutoff,
                           precision_k, &report),
        "evaluate");
  return report;
}

struct TrainOutcome {
  EnginePtr engine;
  std::vector<double> round_map;
};

// Trains over the manifest's chunks, checkpointing after every round.
// Metrics go to `metrics` with `prefix` on MAP rows.
TrainOutcome TrainStream(const ts_config* config, const ts_manifest* manifest, size_t chunk_limit,
                         bool resume, const std::string& checkpoint, MetricsWriter& metrics,
                         std::vector<std::string>* timing, const std::string& map_name,
                         bool verbose) {
  ts_engine* raw = nullptr;
  if (resume && !checkpoint.empty() && std::filesystem::exists(checkpoint)) {
    Check(ts_engine_load(checkpoint.c_str(), &raw), checkpoint);
  } else {
    Check(ts_engine_create(config, manifest, &raw), "engine");
  }
  TrainOutcome out{EnginePtr(raw), {}};
  ts_engine_info info{};
  Check(ts_engine_get_info(raw, &info), "engine");
  const int bits = std::stoi(ConfigValue(config, "bits"));
  auto queries = OpenQueries(config, manifest, false);
  const size_t cutoff = MapCutoff(config);

  size_t chunks = ts_manifest_chunk_count(manifest);
  if (chunk_limit > 0) chunks = std::min(chunks, chunk_limit);
  for (size_t i = static_cast<size_t>(info.round); i < chunks; ++i) {
    ts_matrix* f = nullptr;
    ts_matrix* t = nullptr;
    Check(ts_manifest_load_chunk(manifest, i, &f, &t), "chunk " + std::to_string(i));
    MatrixPtr features(f), tags(t);
    ts_round_report report{};
    Check(ts_engine_train(raw, f, t, nullptr, &report), "round " + std::to_string(i + 1));
    if (report.tagless > 0) {
      std::cerr << "warning: round " << report.round << " has " << report.tagless
                << " tagless rows\n";
    }
    for (int it = 0; it < report.iterations; ++it) {
      ts_iteration_trace trace{};
      Check(ts_engine_trace(raw, static_cast<size_t>(it), &trace), "trace");
      metrics.Add(report.round, bits, "objective_iter" + std::to_string(it + 1), trace.after_b);
      metrics.Add(report.round, bits, "l21_iter" + std::to_string(it + 1), trace.l21);
    }
    if (timing) {
      timing->push_back(std::to_string(report.round) + "," + std::to_string(report.samples) +
                        "," + FormatValue(report.seconds));
    }
    if (!checkpoint.empty()) Check(ts_engine_save(raw, checkpoint.c_str()), checkpoint);
    if (queries) {
      const ts_eval_report e = EvaluateEngine(raw, manifest, *queries, cutoff, 0);
      metrics.Add(report.round, bits, map_name, e.map);
      out.round_map.push_back(e.map);
      if (verbose) {
        std::cout << "round " << report.round << ": " << report.samples << " samples, "
                  << FormatValue(report.seconds) << " s, " << map_name << " "
                  << FormatValue(e.map) << "\n";
      }
    } else if (verbose) {
      std::cout << "round " << report.round << ": " << report.samples << " samples, "
                << FormatValue(report.seconds) << " s\n";
    }
  }
  return out;
}

void WriteTiming(const std::string& path, const std::vector<std::string>& rows) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << "round,samples,seconds\n";
  for (const auto& r : rows) out << r << "\n";
  if (!out) throw Failure{TS_ERR_IO, "cannot write " + path};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tagstream: online hashing from weakly tagged image streams"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a clustered synthetic dataset");
  ts_synthetic_spec spec{};
  ts_synthetic_defaults(&spec);
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--clusters", spec.clusters);
  synth->add_option("--dim", spec.feature_dim);
  synth->add_option("--tags-per-cluster", spec.tags_per_cluster);
  synth->add_option("--rounds", spec.rounds);
  synth->add_option("--per-round", spec.per_round);
  synth->add_option("--queries", spec.queries);
  synth->add_option("--embedding-dim", spec.embedding_dim);
  synth->add_option("--spread", spec.center_spread);
  synth->add_option("--noise", spec.noise);
  synth->add_option("--flip-rate", spec.flip_rate);
  synth->add_option("--embedding-scale", spec.embedding_scale);
  synth->add_option("--seed", spec.seed);

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "prune rare and unembeddable tags");
  std::string prep_manifest, prep_out;
  uint64_t min_count = 50;
  prep->add_option("--manifest", prep_manifest)->required();
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_option("--min-count", min_count);

  // train
  auto* train = app.add_subcommand("train", "train over a manifest's chunks");
  ModelFlags train_flags;
  train_flags.Attach(train);
  size_t chunk_limit = 0;
  bool resume = false;
  train->add_option("--chunks", chunk_limit, "train on at most this many chunks");
  train->add_flag("--resume", resume, "continue from --checkpoint if it exists");
  train->add_option("--variant", train_flags.variant, "woh, woh-1, woh-2 or woh-3");

  // eval
  auto* eval = app.add_subcommand("eval", "MAP and precision@k of a checkpoint");
  ModelFlags eval_flags;
  eval_flags.Attach(eval);
  std::string eval_queries, eval_labels;
  size_t precision_k = 100;
  eval->add_option("--queries", eval_queries, "query features");
  eval->add_option("--query-labels", eval_labels, "query ground-truth labels");
  eval->add_option("--precision-k", precision_k);

  // query
  auto* query = app.add_subcommand("query", "rank the database for each query row (TSV)");
  std::string query_ckpt, query_features;
  size_t query_k = 10;
  query->add_option("--checkpoint", query_ckpt)->required();
  query->add_option("--queries", query_features)->required();
  query->add_option("-k,--k", query_k);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train each ablation variant and report MAP");
  ModelFlags ablate_flags;
  ablate_flags.Attach(ablate);
  std::vector<std::string> variants{"woh", "woh-1", "woh-2", "woh-3"};
  size_t ablate_chunks = 0;
  ablate->add_option("--variants", variants)->delimiter(',');
  ablate->add_option("--chunks", ablate_chunks);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) {
      Check(ts_synthetic_write(&spec, synth_out.c_str()), "synth");
      std::cout << "wrote " << (std::filesystem::path(synth_out) / "manifest.txt").string()
                << "\n";
    } else if (*prep) {
      ts_preprocess_report r{};
      Check(ts_preprocess(prep_manifest.c_str(), min_count, prep_out.c_str(), &r), "preprocess");
      std::cout << "tags: " << r.original_tags << " -> " << r.kept_tags << " (" << r.pruned_rare
                << " rare, " << r.pruned_unembeddable << " without embedding)\n"
                << "rows: " << r.rows << ", tagless after pruning: " << r.tagless_rows << "\n";
      if (r.tagless_rows > 0) {
        std::cerr << "warning: " << r.tagless_rows << " rows have no tags left\n";
      }
    } else if (*train) {
      Config config = train_flags.Build();
      Manifest manifest = OpenManifest(config.get());
      MetricsWriter metrics;
      std::vector<std::string> timing;
      const std::string checkpoint = ConfigValue(config.get(), "checkpoint");
      TrainStream(config.get(), manifest.get(), chunk_limit, resume, checkpoint, metrics, &timing,
                  "map", true);
      metrics.Write(ConfigValue(config.get(), "metrics"));
      WriteTiming(ConfigValue(config.get(), "timing"), timing);
    } else if (*eval) {
      Config config = eval_flags.Build();
      if (!eval_queries.empty()) Check(ts_config_set(config.get(), "query_features", eval_queries.c_str()), "--queries");
      if (!eval_labels.empty()) Check(ts_config_set(config.get(), "query_labels", eval_labels.c_str()), "--query-labels");
      Manifest manifest = OpenManifest(config.get());
      const std::string checkpoint = ConfigValue(config.get(), "checkpoint");
      ts_engine* raw = nullptr;
      Check(ts_engine_load(checkpoint.c_str(), &raw), checkpoint);
      EnginePtr engine(raw);
      auto queries = OpenQueries(config.get(), manifest.get(), true);
      const ts_eval_report r = EvaluateEngine(raw, manifest.get(), *queries,
                                              MapCutoff(config.get()), precision_k);
      ts_engine_info info{};
      Check(ts_engine_get_info(raw, &info), "engine");
      MetricsWriter metrics;
      metrics.Add(r.round, info.bits, "map", r.map);
      metrics.Add(r.round, info.bits, "precision@" + std::to_string(r.precision_k), r.precision);
      std::cout << "round " << r.round << " bits " << info.bits << ": map " << FormatValue(r.map)
                << " over " << r.evaluated << " queries (" << r.excluded << " excluded), precision@"
                << r.precision_k << " " << FormatValue(r.precision) << "\n";
      if (eval_flags.overrides.count("metrics")) metrics.Write(ConfigValue(config.get(), "metrics"));
    } else if (*query) {
      ts_engine* raw = nullptr;
      Check(ts_engine_load(query_ckpt.c_str(), &raw), query_ckpt);
      EnginePtr engine(raw);
      ts_matrix* q = nullptr;
      Check(ts_matrix_load_features(query_features.c_str(), &q), query_features);
      MatrixPtr queries(q);
      std::vector<uint64_t> ids(query_k);
      std::vector<uint32_t> dist(query_k);
      std::cout << "query\tid\tdistance\trank\n";
      for (size_t i = 0; i < ts_matrix_rows(q); ++i) {
        size_t count = 0;
        Check(ts_engine_query(raw, q, i, query_k, ids.data(), dist.data(), ids.size(), &count),
              "query");
        for (size_t j = 0; j < count; ++j) {
          std::cout << i << "\t" << ids[j] << "\t" << dist[j] << "\t" << j + 1 << "\n";
        }
      }
    } else if (*ablate) {
      MetricsWriter metrics;
      std::string metrics_path;
      for (const auto& variant : variants) {
        ModelFlags flags = ablate_flags;
        flags.variant = variant;
        Config config = flags.Build();
        metrics_path = ConfigValue(config.get(), "metrics");
        Manifest manifest = OpenManifest(config.get());
        if (!OpenQueries(config.get(), manifest.get(), false)) {
          throw Failure{TS_ERR_CONFIG, "ablation needs a query set"};
        }
        MetricsWriter local;
        const auto out = TrainStream(config.get(), manifest.get(), ablate_chunks, false, "",
                                     local, nullptr, "map_" + variant, false);
        for (const auto& row : local.rows) {
          if (row.find(",map_") != std::string::npos) metrics.rows.push_back(row);
        }
        std::cout << variant << ": final map " << FormatValue(out.round_map.back()) << "\n";
      }
      metrics.Write(metrics_path);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return ExitFor(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
