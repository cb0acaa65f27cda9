// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "tagstream/error.hpp"
#include "tagstream/io.hpp"

namespace tagstream {
namespace {

double ParseReal(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a number");
  }
  return out;
}

long long ParseInt(std::string_view key, std::string_view value) {
  long long out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not an integer");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a boolean");
}

std::string Format(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

const std::vector<std::string>& RunConfig::Keys() {
  static const std::vector<std::string> keys = {
      "alpha", "beta", "theta", "mu", "iters", "dcc_sweeps", "bits", "anchors",
      "epsilon_norm", "tag_regression", "seed", "manifest", "checkpoint", "metrics",
      "timing", "query_features", "query_labels", "min_count", "map_cutoff", "variant"};
  return keys;
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  if (key == "alpha") hyper.alpha = ParseReal(key, value);
  else if (key == "beta") hyper.beta = ParseReal(key, value);
  else if (key == "theta") hyper.theta = ParseReal(key, value);
  else if (key == "mu") hyper.mu = ParseReal(key, value);
  else if (key == "iters") hyper.iterations = static_cast<int>(ParseInt(key, value));
  else if (key == "dcc_sweeps") hyper.dcc_sweeps = static_cast<int>(ParseInt(key, value));
  else if (key == "bits") hyper.bits = static_cast<int>(ParseInt(key, value));
  else if (key == "anchors") hyper.anchors = static_cast<Index>(ParseInt(key, value));
  else if (key == "epsilon_norm") hyper.epsilon_norm = ParseReal(key, value);
  else if (key == "tag_regression") hyper.tag_regression = ParseBool(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(ParseInt(key, value));
  else if (key == "manifest") manifest = std::string(value);
  else if (key == "checkpoint") checkpoint = std::string(value);
  else if (key == "metrics") metrics = std::string(value);
  else if (key == "timing") timing = std::string(value);
  else if (key == "query_features") query_features = std::string(value);
  else if (key == "query_labels") query_labels = std::string(value);
  else if (key == "min_count") min_count = static_cast<Index>(ParseInt(key, value));
  else if (key == "map_cutoff") {
    const long long k = ParseInt(key, value);
    if (k < 0) throw ConfigError("map_cutoff must be non-negative");
    map_cutoff = k == 0 ? std::nullopt : std::optional<Index>(k);
  } else if (key == "variant") {
    ApplyVariant(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

std::string RunConfig::Get(std::string_view key) const {
  if (key == "alpha") return Format(hyper.alpha);
  if (key == "beta") return Format(hyper.beta);
  if (key == "theta") return Format(hyper.theta);
  if (key == "mu") return Format(hyper.mu);
  if (key == "iters") return std::to_string(hyper.iterations);
  if (key == "dcc_sweeps") return std::to_string(hyper.dcc_sweeps);
  if (key == "bits") return std::to_string(hyper.bits);
  if (key == "anchors") return std::to_string(hyper.anchors);
  if (key == "epsilon_norm") return Format(hyper.epsilon_norm);
  if (key == "tag_regression") return hyper.tag_regression ? "true" : "false";
  if (key == "seed") return std::to_string(seed);
  if (key == "manifest") return manifest.string();
  if (key == "checkpoint") return checkpoint.string();
  if (key == "metrics") return metrics.string();
  if (key == "timing") return timing.string();
  if (key == "query_features") return query_features.string();
  if (key == "query_labels") return query_labels.string();
  if (key == "min_count") return std::to_string(min_count);
  if (key == "map_cutoff") return map_cutoff ? std::to_string(*map_cutoff) : "0";
  if (key == "variant") return variant;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  RunConfig cfg;
  const auto base = path.parent_path();
  for (const auto& kv : ParseKeyValueFile(path)) {
    try {
      cfg.Set(kv.key, kv.value);
    } catch (const Error& e) {
      throw ConfigError(path.string() + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
  for (auto* p : {&cfg.manifest, &cfg.checkpoint, &cfg.metrics, &cfg.timing,
                  &cfg.query_features, &cfg.query_labels}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return cfg;
}

void RunConfig::ApplyVariant(std::string_view name) {
  if (name == "woh" || name == "full") {
    // defaults
  } else if (name == "woh-1") {
    hyper.theta = 0.0;
  } else if (name == "woh-2") {
    hyper.theta = 0.0;
    hyper.tag_regression = false;
  } else if (name == "woh-3") {
    hyper.alpha = 0.0;
  } else {
    throw ConfigError("unknown variant '" + std::string(name) +
                      "' (expected woh, woh-1, woh-2 or woh-3)");
  }
  variant = std::string(name == "full" ? "woh" : name);
}

}  // namespace tagstream
