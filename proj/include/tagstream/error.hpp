// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tagstream {

enum class ErrorKind {
  kConfig,     // bad hyperparameter, flag or config key
  kShape,      // dimension mismatch between inputs
  kData,       // malformed or non-finite file contents
  kState,      // operation invalid in the current lifecycle state
  kNumeric,    // non-finite intermediate, degenerate kernel
  kIo,         // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ConfigError(const std::string& msg) { return {ErrorKind::kConfig, msg}; }
inline Error ShapeError(const std::string& msg) { return {ErrorKind::kShape, msg}; }
inline Error DataError(const std::string& msg) { return {ErrorKind::kData, msg}; }
inline Error StateError(const std::string& msg) { return {ErrorKind::kState, msg}; }
inline Error NumericError(const std::string& msg) { return {ErrorKind::kNumeric, msg}; }
inline Error IoError(const std::string& msg) { return {ErrorKind::kIo, msg}; }

}  // namespace tagstream
