// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/codes.hpp"

#include <string>

#include "tagstream/error.hpp"

namespace tagstream {

CodeBlock::CodeBlock(Index count, int bits)
    : count_(count),
      bits_(bits),
      words_(static_cast<std::size_t>(count * WordsPerCode(bits)), 0) {
  if (bits < 1) throw ConfigError("code length must be at least 1 bit");
}

CodeBlock CodeBlock::FromSigns(const Matrix& values) {
  CodeBlock out(values.rows(), static_cast<int>(values.cols()));
  const Index wpc = out.words_per_code();
  for (Index i = 0; i < values.rows(); ++i) {
    std::uint64_t* code = out.words_.data() + i * wpc;
    for (Index j = 0; j < values.cols(); ++j) {
      if (values(i, j) >= 0.0) code[j / kBitsPerWord] |= std::uint64_t{1} << (j % kBitsPerWord);
    }
  }
  return out;
}

CodeBlock CodeBlock::FromPacked(std::vector<std::uint64_t> words, Index count, int bits) {
  CodeBlock out(count, bits);
  if (static_cast<Index>(words.size()) != count * out.words_per_code()) {
    throw ShapeError("packed buffer holds " + std::to_string(words.size()) +
                     " words, expected " + std::to_string(count * out.words_per_code()));
  }
  const int tail = bits % kBitsPerWord;
  if (tail != 0) {
    const std::uint64_t pad_mask = ~((std::uint64_t{1} << tail) - 1);
    for (Index i = 0; i < count; ++i) {
      if (words[static_cast<std::size_t>((i + 1) * out.words_per_code() - 1)] & pad_mask) {
        throw DataError("packed code " + std::to_string(i) + " has padding bits set");
      }
    }
  }
  out.words_ = std::move(words);
  return out;
}

Matrix CodeBlock::Dense() const {
  Matrix out(count_, bits_);
  for (Index i = 0; i < count_; ++i) {
    for (int j = 0; j < bits_; ++j) out(i, j) = Bit(i, j);
  }
  return out;
}

std::span<const std::uint64_t> CodeBlock::Code(Index i) const {
  return {words_.data() + i * words_per_code(), static_cast<std::size_t>(words_per_code())};
}

int CodeBlock::Bit(Index i, int j) const {
  const auto word = words_[static_cast<std::size_t>(i * words_per_code() + j / kBitsPerWord)];
  return (word >> (j % kBitsPerWord)) & 1u ? 1 : -1;
}

void CodeBlock::Append(const CodeBlock& other) {
  if (other.count_ == 0) return;
  if (count_ == 0 && bits_ == 0) {
    *this = other;
    return;
  }
  if (other.bits_ != bits_) {
    throw ShapeError("cannot append " + std::to_string(other.bits_) + "-bit codes to " +
                     std::to_string(bits_) + "-bit block");
  }
  words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  count_ += other.count_;
}

}  // namespace tagstream
