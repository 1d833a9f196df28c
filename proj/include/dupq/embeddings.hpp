// Copyright 2026 The dupq Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dupq/common.hpp"
#include "dupq/text.hpp"

namespace dupq {

/// Pretrained word vectors, one row per word.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  /// Appends a row; returns false (and ignores it) if the word is present.
  bool add(const std::string& word, std::span<const float> values);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  std::int64_t find(const std::string& word) const;
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
  }
  const std::string& word(std::size_t i) const { return words_[i]; }

  /// FNV-1a of the source file bytes (0 for tables built in memory).
  std::uint64_t source_hash() const { return source_hash_; }
  void set_source_hash(std::uint64_t h) { source_hash_ = h; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
  std::uint64_t source_hash_ = 0;
};

/// Loads a whitespace-separated text file ("word v1 ... vd" per line).
/// Lines with the wrong number of values are skipped with a warning. When
/// `keep` is given, only those words are retained. Throws DataError when
/// the file is unreadable or yields no rows.
EmbeddingTable load_embeddings(const std::string& path, std::size_t expected_dim,
                               Warnings* warnings = nullptr,
                               const std::unordered_set<std::string>* keep = nullptr);

/// Writes "<key> = <value>" lines: source, hash, dim, rows.
void write_embedding_manifest(const std::string& path, const EmbeddingTable& table,
                              const std::string& source);

struct OovPolicy {
  enum class Kind { skip, gaussian } kind = Kind::skip;
  double sigma = 0.1;
  std::uint64_t seed = 0;

  static OovPolicy skip() { return {}; }
  static OovPolicy gaussian(double sigma, std::uint64_t seed) {
    return {Kind::gaussian, sigma, seed};
  }
};

/// Deterministic Gaussian vector for an out-of-table token.
std::vector<double> oov_vector(const std::string& token, std::size_t dim, double sigma,
                               std::uint64_t seed);

using SentenceEmbedding = std::vector<double>;

/// Sum of the rows of the tokens; empty input gives the zero vector.
SentenceEmbedding embed_sentence(const TokenSequence& tokens, const EmbeddingTable& table,
                                 const OovPolicy& oov = OovPolicy::skip());

/// u followed by v.
std::vector<double> pair_concat(std::span<const double> u, std::span<const double> v);

struct DistanceFeatures {
  double bray_curtis = 0;
  double canberra = 0;
  double chebyshev = 0;
  double city_block = 0;
  double correlation = 0;
  double cosine = 0;
  double euclidean = 0;

  std::array<double, 7> as_array() const {
    return {bray_curtis, canberra, chebyshev, city_block, correlation, cosine, euclidean};
  }
};

inline constexpr std::array<const char*, 7> kDistanceNames = {
    "bray_curtis", "canberra", "chebyshev", "city_block", "correlation", "cosine", "euclidean"};

/// Seven vector distances. Degenerate denominators (zero vectors, constant
/// vectors for correlation) give 0.
DistanceFeatures distance_features(std::span<const double> u, std::span<const double> v);

}  // namespace dupq
