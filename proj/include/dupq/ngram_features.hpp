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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dupq/corpus.hpp"
#include "dupq/sparse.hpp"
#include "dupq/text.hpp"

namespace dupq {

/// N-gram feature settings. Features cover every order 1..max_n.
struct NGramConfig {
  int max_n = 1;
  text::Pipeline pipeline{{text::Step::remove_non_ascii}};
  std::uint64_t min_count = 1;

  void validate() const;
};

using NGram = std::vector<std::string>;

/// Contiguous windows of length n with their multiplicities.
std::map<NGram, std::uint64_t> extract_ngrams(const TokenSequence& tokens, int n);

/// Frozen mapping from (question slot, n-gram) to a dense column index.
/// Columns are ordered by slot, then n, then lexicographically by tokens.
class FeatureSpace {
 public:
  struct Column {
    int slot = 1;  // 1 or 2
    NGram ngram;
  };

  static FeatureSpace fit(const Dataset& d, const NGramConfig& cfg);

  std::size_t size() const { return n_columns_; }
  const NGramConfig& config() const { return cfg_; }

  /// Column for (slot, n-gram), or -1 when out of space.
  std::int64_t column(int slot, const NGram& ngram) const;
  Column column_info(std::size_t col) const;

  SparseVector vectorize(const QuestionPair& p) const;
  SparseVector vectorize(const TokenSequence& q1, const TokenSequence& q2) const;
  SparseMatrix vectorize(const Dataset& d) const;

  /// Content hash over the serialized form.
  std::uint64_t hash() const;

  /// Versioned text format: a header block followed by one line per column,
  /// "slot<TAB>n<TAB>space-joined tokens", in column order.
  void save(const std::string& path) const;
  static FeatureSpace load(const std::string& path);
  std::string serialize() const;
  static FeatureSpace deserialize(std::string_view text);

 private:
  struct Key {
    std::uint32_t slot_n = 0;  // slot * 4 + n
    std::array<std::uint32_t, 3> tok{};
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  void add_windows(const TokenSequence& tokens, int slot, std::vector<std::pair<std::uint32_t, double>>& out) const;

  NGramConfig cfg_;
  std::vector<std::string> tokens_;  // sorted
  std::unordered_map<std::string, std::uint32_t> token_id_;
  std::unordered_map<Key, std::uint32_t, KeyHash> columns_;
  std::vector<Key> keys_;  // column -> key
  std::size_t n_columns_ = 0;
};

}  // namespace dupq
