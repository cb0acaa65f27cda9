// Copyright 2026 The tagstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "tagstream/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <zlib.h>

#include "tagstream/error.hpp"

namespace tagstream {
namespace {

constexpr char kFeatureMagic[4] = {'W', 'O', 'H', 'F'};
constexpr char kCheckpointMagic[8] = {'T', 'S', 'C', 'K', 'P', 'T', '\r', '\n'};

std::string Where(const fs::path& path, int line) {
  return path.string() + ":" + std::to_string(line);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits on commas, or on whitespace when the line has no comma.
std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(Trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool ParseIndex(std::string_view s, long long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::ofstream OpenForWrite(const fs::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Little-endian byte image builder.
class ByteWriter {
 public:
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void I64(std::int64_t v) { U64(static_cast<std::uint64_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  // rows, cols, then row-major values
  void Mat(const Matrix& m) {
    I64(m.rows());
    I64(m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) F64(m(i, j));
    }
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  const std::uint8_t* Take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw DataError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t U8() { return *Take(1); }
  std::uint32_t U32() {
    const auto* p = Take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    const auto* p = Take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
  }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  std::int64_t I64() { return static_cast<std::int64_t>(U64()); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const std::uint32_t n = U32();
    const auto* p = Take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  Matrix Mat() {
    const std::int64_t rows = I64();
    const std::int64_t cols = I64();
    if (rows < 0 || cols < 0 ||
        (cols > 0 && static_cast<std::uint64_t>(rows) >
                         (bytes_.size() - pos_) / 8 / static_cast<std::uint64_t>(cols))) {
      throw DataError("checkpoint matrix header at byte " + std::to_string(pos_ - 16) +
                      " is inconsistent with the file size");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) m(i, j) = F64();
    }
    return m;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(bytes.size() - done, std::numeric_limits<uInt>::max()));
    crc = crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

fs::path Resolve(const fs::path& base_dir, const std::string& value) {
  fs::path p(value);
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix LoadFeatures(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kFeatureMagic, 4) == 0;
  if (binary) {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    auto u32_at = [&](std::size_t off) {
      std::uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[off + i]} << (8 * i);
      return v;
    };
    if (bytes.size() < 8) throw DataError(path.string() + ": truncated header at byte 4");
    const std::uint64_t n = u32_at(0);
    const std::uint64_t d = u32_at(4);
    const std::uint64_t expected = 8 + n * d * 4;
    if (bytes.size() < expected) {
      throw DataError(path.string() + ": truncated at byte " +
                      std::to_string(bytes.size() + 4) + ", expected " +
                      std::to_string(expected + 4) + " bytes");
    }
    if (bytes.size() > expected) {
      throw DataError(path.string() + ": trailing data after byte " + std::to_string(expected + 4));
    }
    Matrix out(static_cast<Index>(n), static_cast<Index>(d));
    for (std::uint64_t i = 0; i < n; ++i) {
      for (std::uint64_t j = 0; j < d; ++j) {
        const std::size_t off = 8 + (i * d + j) * 4;
        const float v = std::bit_cast<float>(u32_at(off));
        if (!std::isfinite(v)) {
          throw DataError(path.string() + ": non-finite value at byte " + std::to_string(off + 4));
        }
        out(static_cast<Index>(i), static_cast<Index>(j)) = v;
      }
    }
    return out;
  }

  in.close();
  const auto lines = ReadLines(path);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto text = Trim(lines[ln]);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = SplitFields(text);
    if (rows.empty()) width = fields.size();
    if (fields.size() != width) {
      throw DataError(Where(path, static_cast<int>(ln + 1)) + ": expected " +
                      std::to_string(width) + " columns, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!ParseDouble(fields[j], row[j]) || !std::isfinite(row[j])) {
        throw DataError(Where(path, static_cast<int>(ln + 1)) + ": bad value '" +
                        std::string(fields[j]) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return out;
}

void SaveFeaturesBinary(const fs::path& path, const Matrix& features) {
  ByteWriter w;
  w.Bytes(kFeatureMagic, 4);
  w.U32(static_cast<std::uint32_t>(features.rows()));
  w.U32(static_cast<std::uint32_t>(features.cols()));
  for (Index i = 0; i < features.rows(); ++i) {
    for (Index j = 0; j < features.cols(); ++j) {
      w.U32(std::bit_cast<std::uint32_t>(static_cast<float>(features(i, j))));
    }
  }
  WriteFileAtomic(path, w.buffer());
}

void SaveFeaturesCsv(const fs::path& path, const Matrix& features) {
  auto out = OpenForWrite(path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < features.rows(); ++i) {
    for (Index j = 0; j < features.cols(); ++j) {
      if (j) out << ',';
      out << features(i, j);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

TagChunk LoadIncidence(const fs::path& path, Index rows, Index cols, IncidenceFormat format) {
  const auto lines = ReadLines(path);
  std::vector<std::pair<int, std::vector<std::string_view>>> records;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto text = Trim(lines[ln]);
    if (text.empty() || text.front() == '#') continue;
    records.emplace_back(static_cast<int>(ln + 1), SplitFields(text));
  }
  if (format == IncidenceFormat::kAuto) {
    const bool all_pairs = std::all_of(records.begin(), records.end(),
                                       [](const auto& r) { return r.second.size() == 2; });
    const bool looks_dense = cols == 2 && static_cast<Index>(records.size()) == rows;
    format = (all_pairs && !looks_dense) ? IncidenceFormat::kPairs : IncidenceFormat::kDense;
  }

  std::vector<std::pair<Index, Index>> pairs;
  if (format == IncidenceFormat::kPairs) {
    for (const auto& [line, fields] : records) {
      long long r = 0;
      long long c = 0;
      if (fields.size() != 2 || !ParseIndex(fields[0], r) || !ParseIndex(fields[1], c)) {
        throw DataError(Where(path, line) + ": expected 'row,column' integer pair");
      }
      if (r < 0 || c < 0) throw DataError(Where(path, line) + ": negative index");
      if (r >= rows) {
        throw DataError(Where(path, line) + ": row " + std::to_string(r) + " >= " +
                        std::to_string(rows));
      }
      if (c >= cols) {
        throw DataError(Where(path, line) + ": column " + std::to_string(c) + " >= " +
                        std::to_string(cols));
      }
      pairs.emplace_back(static_cast<Index>(r), static_cast<Index>(c));
    }
  } else {
    if (static_cast<Index>(records.size()) != rows) {
      throw DataError(path.string() + ": dense incidence has " + std::to_string(records.size()) +
                      " rows, expected " + std::to_string(rows));
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& [line, fields] = records[i];
      if (static_cast<Index>(fields.size()) != cols) {
        throw DataError(Where(path, line) + ": expected " + std::to_string(cols) + " columns");
      }
      for (std::size_t j = 0; j < fields.size(); ++j) {
        if (fields[j] == "1") {
          pairs.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
        } else if (fields[j] != "0") {
          throw DataError(Where(path, line) + ": dense incidence values must be 0 or 1");
        }
      }
    }
  }
  return TagChunk::FromPairs(rows, cols, pairs);
}

void SaveIncidencePairs(const fs::path& path, const TagChunk& incidence) {
  auto out = OpenForWrite(path);
  for (Index i = 0; i < incidence.rows(); ++i) {
    for (Index c : incidence.TagsOf(i)) out << i << ',' << c << '\n';
  }
}

std::vector<Index> ColumnCounts(const TagChunk& incidence) {
  std::vector<Index> counts(static_cast<std::size_t>(incidence.cols()), 0);
  const auto& y = incidence.sparse();
  for (Index i = 0; i < y.outerSize(); ++i) {
    for (SparseRowMatrix::InnerIterator it(y, i); it; ++it) {
      ++counts[static_cast<std::size_t>(it.col())];
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------

std::vector<std::string> LoadVocab(const fs::path& path) {
  std::vector<std::string> vocab;
  for (const auto& line : ReadLines(path)) {
    const auto token = Trim(line);
    if (!token.empty()) vocab.emplace_back(token);
  }
  return vocab;
}

void SaveVocab(const fs::path& path, std::span<const std::string> vocab) {
  auto out = OpenForWrite(path);
  for (const auto& token : vocab) out << token << '\n';
}

EmbeddingLoad LoadEmbeddings(const fs::path& path, std::span<const std::string> vocab) {
  const auto lines = ReadLines(path);
  std::map<std::string, Index, std::less<>> wanted;
  for (std::size_t i = 0; i < vocab.size(); ++i) wanted.emplace(vocab[i], static_cast<Index>(i));

  std::map<Index, std::vector<double>> found;
  Index dim = -1;
  bool first_content = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto text = Trim(lines[ln]);
    if (text.empty()) continue;
    const auto fields = SplitFields(text);
    long long a = 0;
    long long b = 0;
    if (first_content && fields.size() == 2 && ParseIndex(fields[0], a) &&
        ParseIndex(fields[1], b)) {
      first_content = false;
      continue;  // "count dim" header
    }
    first_content = false;
    if (fields.size() < 2) {
      throw DataError(Where(path, static_cast<int>(ln + 1)) + ": expected 'token v1 ... vf'");
    }
    const Index f = static_cast<Index>(fields.size()) - 1;
    if (dim < 0) dim = f;
    if (f != dim) {
      throw DataError(Where(path, static_cast<int>(ln + 1)) + ": embedding has " +
                      std::to_string(f) + " values, earlier lines have " + std::to_string(dim));
    }
    const auto hit = wanted.find(fields[0]);
    if (hit == wanted.end() || found.count(hit->second)) continue;
    std::vector<double> vec(static_cast<std::size_t>(f));
    for (Index j = 0; j < f; ++j) {
      if (!ParseDouble(fields[static_cast<std::size_t>(j) + 1], vec[static_cast<std::size_t>(j)]) ||
          !std::isfinite(vec[static_cast<std::size_t>(j)])) {
        throw DataError(Where(path, static_cast<int>(ln + 1)) + ": bad embedding value");
      }
    }
    found.emplace(hit->second, std::move(vec));
  }

  EmbeddingLoad out;
  const Index f = std::max<Index>(dim, 0);
  out.table.vectors.resize(static_cast<Index>(found.size()), f);
  Index row = 0;
  for (Index col = 0; col < static_cast<Index>(vocab.size()); ++col) {
    const auto it = found.find(col);
    if (it == found.end()) {
      out.missing.push_back(col);
      continue;
    }
    out.columns.push_back(col);
    out.table.tag_names.push_back(vocab[static_cast<std::size_t>(col)]);
    for (Index j = 0; j < f; ++j) out.table.vectors(row, j) = it->second[static_cast<std::size_t>(j)];
    ++row;
  }
  return out;
}

void SaveEmbeddingsText(const fs::path& path, const EmbeddingTable& table) {
  auto out = OpenForWrite(path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < table.tags(); ++i) {
    out << table.tag_names.at(static_cast<std::size_t>(i));
    for (Index j = 0; j < table.dim(); ++j) out << ' ' << table.vectors(i, j);
    out << '\n';
  }
}

VocabPruning PruneVocab(std::span<const Index> counts, Index min_count,
                        const std::vector<bool>& has_embedding) {
  if (has_embedding.size() != counts.size()) {
    throw ShapeError("embedding coverage and tag counts differ in length");
  }
  VocabPruning out;
  out.remap.assign(counts.size(), -1);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] >= min_count && has_embedding[c]) {
      out.remap[c] = static_cast<Index>(out.kept.size());
      out.kept.push_back(static_cast<Index>(c));
    }
  }
  if (out.kept.empty()) {
    throw ConfigError("every tag was pruned (min_count " + std::to_string(min_count) + ")");
  }
  return out;
}

TagChunk RemapColumns(const TagChunk& tags, const VocabPruning& pruning) {
  if (static_cast<std::size_t>(tags.cols()) != pruning.remap.size()) {
    throw ShapeError("pruning map does not match the tag columns");
  }
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < tags.rows(); ++i) {
    for (Index c : tags.TagsOf(i)) {
      const Index to = pruning.remap[static_cast<std::size_t>(c)];
      if (to >= 0) pairs.emplace_back(i, to);
    }
  }
  return TagChunk::FromPairs(tags.rows(), pruning.surviving(), pairs);
}

// ---------------------------------------------------------------------------

std::vector<KeyValue> ParseKeyValueFile(const fs::path& path) {
  std::vector<KeyValue> out;
  const auto lines = ReadLines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto text = std::string_view(lines[ln]);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = Trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(Where(path, static_cast<int>(ln + 1)) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(Trim(text.substr(0, eq))), std::string(Trim(text.substr(eq + 1))),
                static_cast<int>(ln + 1)};
    if (kv.key.empty()) throw ConfigError(Where(path, kv.line) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

ChunkManifest LoadManifest(const fs::path& path) {
  const fs::path base = path.parent_path();
  ChunkManifest m;
  auto parse_dim = [&](const KeyValue& kv) {
    long long v = 0;
    if (!ParseIndex(kv.value, v) || v < 0) {
      throw ConfigError(Where(path, kv.line) + ": " + kv.key + " must be a non-negative integer");
    }
    return static_cast<Index>(v);
  };
  for (const auto& kv : ParseKeyValueFile(path)) {
    if (kv.key == "feature_dim") m.feature_dim = parse_dim(kv);
    else if (kv.key == "tag_count") m.tag_count = parse_dim(kv);
    else if (kv.key == "label_count") m.label_count = parse_dim(kv);
    else if (kv.key == "vocab") m.vocab = Resolve(base, kv.value);
    else if (kv.key == "embeddings") m.embeddings = Resolve(base, kv.value);
    else if (kv.key == "query_features") m.query_features = Resolve(base, kv.value);
    else if (kv.key == "query_labels") m.query_labels = Resolve(base, kv.value);
    else if (kv.key == "chunk") {
      std::vector<std::string> parts;
      for (auto f : SplitFields(kv.value)) parts.emplace_back(f);
      if (parts.size() < 2 || parts.size() > 3) {
        throw ConfigError(Where(path, kv.line) + ": chunk = features, tags[, labels]");
      }
      ChunkEntry e{Resolve(base, parts[0]), Resolve(base, parts[1]),
                   parts.size() == 3 ? Resolve(base, parts[2]) : fs::path()};
      m.chunks.push_back(std::move(e));
    } else {
      throw ConfigError(Where(path, kv.line) + ": unknown manifest key '" + kv.key + "'");
    }
  }
  if (m.chunks.empty()) throw ConfigError(path.string() + ": manifest lists no chunks");
  if (m.tag_count < 1) throw ConfigError(path.string() + ": tag_count must be declared");
  for (const auto& c : m.chunks) {
    for (const fs::path& p : {c.features, c.tags, c.labels}) {
      if (!p.empty() && !fs::exists(p)) throw IoError("manifest references missing file " + p.string());
    }
  }
  return m;
}

void SaveManifest(const fs::path& path, const ChunkManifest& m) {
  std::ostringstream out;
  out << "feature_dim = " << m.feature_dim << '\n'
      << "tag_count = " << m.tag_count << '\n'
      << "label_count = " << m.label_count << '\n';
  if (!m.vocab.empty()) out << "vocab = " << m.vocab.string() << '\n';
  if (!m.embeddings.empty()) out << "embeddings = " << m.embeddings.string() << '\n';
  if (!m.query_features.empty()) out << "query_features = " << m.query_features.string() << '\n';
  if (!m.query_labels.empty()) out << "query_labels = " << m.query_labels.string() << '\n';
  for (const auto& c : m.chunks) {
    out << "chunk = " << c.features.string() << ", " << c.tags.string();
    if (!c.labels.empty()) out << ", " << c.labels.string();
    out << '\n';
  }
  const std::string text = out.str();
  WriteFileAtomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& ck) {
  ByteWriter w;
  w.Bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.U32(kCheckpointVersion);

  const ModelState& s = ck.state;
  const Hyperparams& h = s.hyper;
  w.F64(h.alpha);
  w.F64(h.beta);
  w.F64(h.theta);
  w.F64(h.mu);
  w.F64(h.epsilon_norm);
  w.I32(h.iterations);
  w.I32(h.dcc_sweeps);
  w.I32(h.bits);
  w.I64(h.anchors);
  w.U8(h.tag_regression ? 1 : 0);

  w.U64(s.seed);
  w.I32(s.round);
  w.I64(s.total_seen);
  w.I64(s.feature_dim);
  w.I64(s.tag_count);
  w.I64(s.embedding_dim);
  w.Mat(s.anchors.anchors);
  w.F64(s.anchors.kernel_width);
  w.Mat(s.w);
  w.Mat(s.u);
  w.Mat(s.v);
  w.Mat(s.p);

  const AccumStats& st = ck.stats;
  for (const Matrix* m : {&st.c1, &st.c2, &st.c3, &st.c4, &st.c5, &st.d1, &st.d2}) w.Mat(*m);
  w.F64(st.z_sq);
  w.F64(st.y_weighted_sq);
  w.I64(st.samples);

  w.Mat(ck.embeddings.vectors);
  w.U32(static_cast<std::uint32_t>(ck.embeddings.tag_names.size()));
  for (const auto& name : ck.embeddings.tag_names) w.Str(name);

  const CodeDatabase& db = ck.database;
  w.I64(db.codes.count());
  w.I32(db.codes.bits());
  for (std::uint64_t word : db.codes.words()) w.U64(word);
  w.U64(db.ids.size());
  for (std::uint64_t id : db.ids) w.U64(id);
  w.U64(db.round_sizes.size());
  for (Index n : db.round_sizes) w.I64(n);

  w.U32(Crc32(w.buffer()));
  return std::move(w.buffer());
}

Checkpoint DeserializeCheckpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 8 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader trailer(bytes.last(4));
  if (trailer.U32() != Crc32(body)) throw DataError("checkpoint checksum mismatch");

  ByteReader r(body);
  r.Take(sizeof(kCheckpointMagic));
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  ModelState& s = ck.state;
  Hyperparams& h = s.hyper;
  h.alpha = r.F64();
  h.beta = r.F64();
  h.theta = r.F64();
  h.mu = r.F64();
  h.epsilon_norm = r.F64();
  h.iterations = r.I32();
  h.dcc_sweeps = r.I32();
  h.bits = r.I32();
  h.anchors = r.I64();
  h.tag_regression = r.U8() != 0;

  s.seed = r.U64();
  s.round = r.I32();
  s.total_seen = r.I64();
  s.feature_dim = r.I64();
  s.tag_count = r.I64();
  s.embedding_dim = r.I64();
  s.anchors.anchors = r.Mat();
  s.anchors.kernel_width = r.F64();
  s.w = r.Mat();
  s.u = r.Mat();
  s.v = r.Mat();
  s.p = r.Mat();

  AccumStats& st = ck.stats;
  for (Matrix* m : {&st.c1, &st.c2, &st.c3, &st.c4, &st.c5, &st.d1, &st.d2}) *m = r.Mat();
  st.z_sq = r.F64();
  st.y_weighted_sq = r.F64();
  st.samples = r.I64();

  ck.embeddings.vectors = r.Mat();
  const std::uint32_t names = r.U32();
  for (std::uint32_t i = 0; i < names; ++i) ck.embeddings.tag_names.push_back(r.Str());

  CodeDatabase& db = ck.database;
  const std::int64_t count = r.I64();
  const std::int32_t bits = r.I32();
  if (count < 0 || bits < 0) throw DataError("checkpoint code database header is invalid");
  if (bits > 0) {
    const std::uint64_t nwords =
        static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(WordsPerCode(bits));
    if (nwords > r.remaining() / 8) throw DataError("checkpoint code database is truncated");
    std::vector<std::uint64_t> words(nwords);
    for (auto& word : words) word = r.U64();
    db.codes = CodeBlock::FromPacked(std::move(words), count, bits);
  }
  const std::uint64_t nids = r.U64();
  if (nids > r.remaining() / 8) throw DataError("checkpoint id list is truncated");
  db.ids.resize(nids);
  for (auto& id : db.ids) id = r.U64();
  const std::uint64_t nrounds = r.U64();
  if (nrounds > r.remaining() / 8) throw DataError("checkpoint round list is truncated");
  db.round_sizes.resize(nrounds);
  for (auto& n : db.round_sizes) n = r.I64();
  if (r.remaining() != 0) throw DataError("checkpoint has trailing bytes");

  if (db.ids.size() != static_cast<std::size_t>(db.codes.count())) {
    throw DataError("checkpoint code and id counts differ");
  }
  h.Validate();
  return ck;
}

void SaveCheckpoint(const fs::path& path, const Checkpoint& checkpoint) {
  WriteFileAtomic(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const fs::path& path) {
  return DeserializeCheckpoint(ReadFileBytes(path));
}

// ---------------------------------------------------------------------------

void WriteMetricsCsv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "round,bits,metric,value\n";
  const auto old_precision = out.precision(12);
  for (const auto& row : rows) {
    out << row.round << ',' << row.bits << ',' << row.metric << ',' << row.value << '\n';
  }
  out.precision(old_precision);
}

void WriteFileAtomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = OpenForWrite(tmp, true);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<std::uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace tagstream
