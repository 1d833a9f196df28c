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
#include <vector>

#include "dupq/common.hpp"

namespace dupq {

struct QuestionPair {
  std::int64_t pair_id = 0;
  std::int64_t qid1 = 0;
  std::int64_t qid2 = 0;
  std::string question1;
  std::string question2;
  int label = 0;  // 1 = duplicate
};

/// Pairs in file order.
using Dataset = std::vector<QuestionPair>;

std::vector<int> labels_of(const Dataset& d);

/// How questions are identified when counting occurrences.
enum class QuestionIdentity { text, qid };

struct DatasetStats {
  std::uint64_t n_pairs = 0;
  std::uint64_t n_negative = 0;
  std::uint64_t n_positive = 0;
  std::uint64_t n_unique_questions = 0;
  std::uint64_t n_multi_occurrence_questions = 0;
  std::uint64_t max_question_occurrence = 0;
  /// occurrence count -> number of questions with that many occurrences
  std::map<std::uint64_t, std::uint64_t> occurrence_histogram;
  std::uint64_t n_nonascii_questions = 0;
  std::uint64_t n_pairs_with_nonascii = 0;
  std::uint64_t n_pairs_with_empty_question = 0;

  bool operator==(const DatasetStats&) const = default;
};

/// Loads a question-pair CSV with header
/// `id,qid1,qid2,question1,question2,is_duplicate` (any column order, extra
/// columns ignored). Malformed rows are skipped with a warning unless
/// `strict`, in which case a DataError naming the row is thrown.
Dataset load_pairs(const std::string& path, bool strict, Warnings* warnings = nullptr);

/// Same as load_pairs over an in-memory CSV document.
Dataset parse_pairs(std::string_view text, bool strict, Warnings* warnings = nullptr,
                    const std::string& source = "<memory>");

void write_pairs(const std::string& path, const Dataset& d);

/// Counts over raw question strings (or qids). Non-ASCII means any code
/// point above 127, which for UTF-8 input is any byte above 127.
DatasetStats compute_stats(const Dataset& d,
                           QuestionIdentity identity = QuestionIdentity::text);

enum class SplitKind { blind, disjoint };

const char* to_string(SplitKind kind);
SplitKind parse_split_kind(const std::string& s);

struct SplitRatios {
  double train = 0.7;
  double validation = 0.2;
  double test = 0.1;

  std::array<double, 3> as_array() const { return {train, validation, test}; }
};

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
  SplitKind kind = SplitKind::blind;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  Warnings warnings;

  const Dataset& part(int i) const;
};

/// Label-stratified random split. Validation and test sizes are
/// floor(n * ratio); train takes the remainder. Within each part, pairs
/// keep their input order.
SplitResult blind_split(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed);

/// Split in which no question text appears in more than one part. Whole
/// connected components of the question graph are assigned greedily,
/// largest first, to the part that best restores the size and label
/// targets.
SplitResult disjoint_split(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed);

/// Number of distinct question texts shared between parts a and b.
std::size_t question_overlap(const Dataset& a, const Dataset& b);

/// Writes train.csv, valid.csv, test.csv and manifest.txt into `dir`.
void write_split(const std::string& dir, const SplitResult& split);

}  // namespace dupq
