#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/error.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

/// Row-major token embeddings with unit-length rows.
class EmbeddingMatrix {
 public:
  static constexpr double kMinNorm = 1e-12;

  EmbeddingMatrix() = default;

  /// Validates the shape, rejects near-zero rows and L2-normalizes the rest.
  EmbeddingMatrix(std::size_t token_count, std::size_t dimension, std::vector<double> values)
      : rows_(token_count), dim_(dimension), values_(std::move(values)) {
    if (dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be >= 1");
    if (values_.size() != rows_ * dim_) {
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(rows_ * dim_) +
                                                    " values, got " + std::to_string(values_.size()));
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      double sq = 0.0;
      for (double v : row(r)) sq += v * v;
      const double norm = std::sqrt(sq);
      if (!(norm >= kMinNorm)) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(r) + " has norm below 1e-12");
      }
      for (std::size_t k = 0; k < dim_; ++k) values_[r * dim_ + k] /= norm;
    }
  }

  static EmbeddingMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t dim = rows.empty() ? 1 : rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "row " + std::to_string(r) + " has dimension " + std::to_string(rows[r].size()) +
                        ", expected " + std::to_string(dim));
      }
      flat.insert(flat.end(), rows[r].begin(), rows[r].end());
    }
    return EmbeddingMatrix(rows.size(), dim, std::move(flat));
  }

  std::size_t token_count() const noexcept { return rows_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * dim_, dim_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(values_).subspan(r * dim_, dim_); }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

struct BertScoreResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Greedy-matching similarity: every token is paired with its most similar
/// counterpart on the other side. No IDF weighting, no baseline rescaling.
inline BertScoreResult greedy_match_score(const EmbeddingMatrix& hyp, const EmbeddingMatrix& ref) {
  if (hyp.empty() || ref.empty()) throw Error(ErrorCode::EmptyMatrix, "embedding matrix has no rows");
  if (hyp.dimension() != ref.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(hyp.dimension()) + " vs " +
                                                  std::to_string(ref.dimension()));
  }
  const std::size_t h = hyp.token_count(), r = ref.token_count(), d = hyp.dimension();
  std::vector<double> best_hyp(h, -INFINITY), best_ref(r, -INFINITY);
  for (std::size_t i = 0; i < h; ++i) {
    const auto a = hyp.row(i);
    for (std::size_t j = 0; j < r; ++j) {
      const auto b = ref.row(j);
      double cos = 0.0;
      for (std::size_t k = 0; k < d; ++k) cos += a[k] * b[k];
      best_hyp[i] = std::max(best_hyp[i], cos);
      best_ref[j] = std::max(best_ref[j], cos);
    }
  }
  BertScoreResult out;
  for (double v : best_hyp) out.precision += v;
  for (double v : best_ref) out.recall += v;
  out.precision /= static_cast<double>(h);
  out.recall /= static_cast<double>(r);
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

namespace detail {

inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Reproducible pseudo-random unit vector for (seed, normalized token).
///
/// Stream: state = seed XOR FNV-1a-64(token UTF-8 bytes); component k is
/// ((splitmix64(state) >> 11) * 2^-53) * 2 - 1; the vector is then divided by
/// its L2 norm. Only IEEE-exact operations are involved, so other
/// implementations of the embedding protocol can reproduce it bit for bit.
inline std::vector<double> deterministic_vector(uint64_t seed, std::size_t dimension,
                                                std::string_view token) {
  uint64_t state = seed ^ detail::fnv1a64(token);
  std::vector<double> v(dimension);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& x : v) {
      x = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      sq += x * x;
    }
  } while (std::sqrt(sq) < EmbeddingMatrix::kMinNorm);
  const double norm = std::sqrt(sq);
  for (auto& x : v) x /= norm;
  return v;
}

inline EmbeddingMatrix deterministic_embeddings(uint64_t seed, std::size_t dimension,
                                                const TokenSequence& tokens) {
  if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::vector<double> flat;
  flat.reserve(tokens.size() * dimension);
  for (const auto& t : tokens) {
    const auto v = deterministic_vector(seed, dimension, t.normalized);
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix(tokens.size(), dimension, std::move(flat));
}

/// Parses {"dimension": d, "vectors": [[...], ...]} (and optional "tokens").
/// Row count must equal `expected_rows`.
inline EmbeddingMatrix parse_embedding_json(const nlohmann::json& doc, std::size_t expected_rows,
                                            ErrorCode malformed = ErrorCode::ParseError) {
  if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("vectors") ||
      !doc["dimension"].is_number_unsigned() || !doc["vectors"].is_array()) {
    throw Error(malformed, "expected object with unsigned \"dimension\" and array \"vectors\"");
  }
  const auto dim = doc["dimension"].get<std::size_t>();
  if (dim == 0) throw Error(malformed, "dimension must be >= 1");
  const auto& rows = doc["vectors"];
  if (rows.size() != expected_rows) {
    throw Error(ErrorCode::TokenCountMismatch, "got " + std::to_string(rows.size()) +
                                                   " vectors for " + std::to_string(expected_rows) +
                                                   " tokens");
  }
  std::vector<double> flat;
  flat.reserve(rows.size() * dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != dim) {
      throw Error(malformed, "vector " + std::to_string(r) + " does not have " + std::to_string(dim) +
                                 " components");
    }
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(malformed, "vector " + std::to_string(r) + " has a non-number");
      flat.push_back(v.get<double>());
    }
  }
  try {
    return EmbeddingMatrix(rows.size(), dim, std::move(flat));
  } catch (const Error& e) {
    throw Error(malformed, e.what());
  }
}

/// Loads an embedding file and checks it against the tokens it should cover.
///
/// Vectors may be laid out one row per line; parse failures name the 1-based
/// line of the offending text.
inline EmbeddingMatrix load_embeddings_file(const std::string& path, const TokenSequence& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open embedding file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
    throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line) + ": " + e.what());
  }
  if (doc.contains("tokens")) {
    const auto& toks = doc["tokens"];
    if (!toks.is_array()) throw Error(ErrorCode::ParseError, path + ": \"tokens\" must be an array");
    if (toks.size() != expected.size()) {
      throw Error(ErrorCode::TokenCountMismatch, path + ": file has " + std::to_string(toks.size()) +
                                                     " tokens, text has " +
                                                     std::to_string(expected.size()));
    }
  }
  try {
    return parse_embedding_json(doc, expected.size());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

/// Writes the embedding file format for `tokens` (used by tooling and tests).
inline void save_embeddings_file(const std::string& path, const TokenSequence& tokens,
                                 const EmbeddingMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "{\"dimension\": " << matrix.dimension() << ",\n\"tokens\": "
      << nlohmann::json(tokens.normalized()).dump() << ",\n\"vectors\": [\n";
  for (std::size_t r = 0; r < matrix.token_count(); ++r) {
    const auto row = matrix.row(r);
    out << nlohmann::json(std::vector<double>(row.begin(), row.end())).dump()
        << (r + 1 < matrix.token_count() ? ",\n" : "\n");
  }
  out << "]}\n";
}

}  // namespace simpeval
