// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tagstream/linalg.hpp"

namespace tagstream {

inline constexpr int kBitsPerWord = 64;

inline Index WordsPerCode(int bits) { return (bits + kBitsPerWord - 1) / kBitsPerWord; }

/// A block of binary codes over {-1, +1}.
///
/// The packed form is canonical: bit j of a code lives in word j / 64 at
/// position j % 64, a set bit encodes +1, and padding bits past `bits` are
/// always zero. The dense form is materialized on demand.
class CodeBlock {
 public:
  CodeBlock() = default;
  CodeBlock(Index count, int bits);

  /// Entries >= 0 map to +1, negative entries to -1 (sign(0) = +1).
  static CodeBlock FromSigns(const Matrix& values);
  /// Takes ownership of packed words; rejects nonzero padding bits.
  static CodeBlock FromPacked(std::vector<std::uint64_t> words, Index count, int bits);

  Index count() const { return count_; }
  int bits() const { return bits_; }
  Index words_per_code() const { return WordsPerCode(bits_); }

  /// count x bits matrix of +-1.
  Matrix Dense() const;
  std::span<const std::uint64_t> Code(Index i) const;
  const std::vector<std::uint64_t>& words() const { return words_; }
  /// +1 or -1.
  int Bit(Index i, int j) const;

  void Append(const CodeBlock& other);

  friend bool operator==(const CodeBlock&, const CodeBlock&) = default;

 private:
  Index count_ = 0;
  int bits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace tagstream
