// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagstream/model.hpp"

namespace tagstream {

/// Everything a training or evaluation run reads from "key = value" files and
/// command-line overrides. Defaults are the published hyperparameters.
struct RunConfig {
  Hyperparams hyper;
  std::uint64_t seed = 1;
  std::filesystem::path manifest;
  std::filesystem::path checkpoint = "model.tsck";
  std::filesystem::path metrics = "metrics.csv";
  std::filesystem::path timing;  // per-round wall time CSV; empty disables
  std::filesystem::path query_features;
  std::filesystem::path query_labels;
  Index min_count = 50;
  std::optional<Index> map_cutoff;
  std::string variant = "woh";

  /// Throws ConfigError for unknown keys or unparsable values.
  void Set(std::string_view key, std::string_view value);
  std::string Get(std::string_view key) const;
  static const std::vector<std::string>& Keys();

  /// Reads a config file; relative paths resolve against its directory.
  static RunConfig Load(const std::filesystem::path& path);

  /// Applies an ablation variant on top of the current hyperparameters:
  /// woh (no change), woh-1 (theta = 0), woh-2 (theta = 0, no tag
  /// regression), woh-3 (alpha = 0).
  void ApplyVariant(std::string_view name);
};

}  // namespace tagstream
