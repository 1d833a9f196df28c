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
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dupq/corpus.hpp"
#include "dupq/text.hpp"

namespace dupq {

inline constexpr std::size_t kNumHandFeatures = 25;

/// Dense, vocabulary-independent pair features. Column order follows the
/// groups L, LC, LCXS, LW, CAP, PRE, M.
using HandFeatureVector = std::array<double, kNumHandFeatures>;

extern const std::array<const char*, kNumHandFeatures> kHandFeatureNames;

enum class FeatureGroup { L, LC, LCXS, LW, CAP, PRE, M };

inline constexpr std::array<FeatureGroup, 7> kAllFeatureGroups = {
    FeatureGroup::L,   FeatureGroup::LC,  FeatureGroup::LCXS, FeatureGroup::LW,
    FeatureGroup::CAP, FeatureGroup::PRE, FeatureGroup::M};

const char* to_string(FeatureGroup g);
FeatureGroup parse_feature_group(std::string_view name);

/// [first, first + count) columns of a group.
std::pair<std::size_t, std::size_t> group_columns(FeatureGroup g);

/// Bundled English stop-word list (lowercase, punctuation-free forms).
class StopWordList {
 public:
  static const StopWordList& bundled();
  static constexpr int kVersion = 1;

  bool contains(const std::string& w) const { return words_.contains(w); }
  std::size_t size() const { return words_.size(); }
  /// FNV-1a over the sorted words joined by '\n'.
  std::uint64_t hash() const;
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

/// Tokens used by every hand feature: punctuation removed, case kept.
TokenSequence hand_feature_tokens(std::string_view question);

struct CountAndNorm {
  double count = 0;
  double normalized = 0;
  bool operator==(const CountAndNorm&) const = default;
};

/// (l1, l2, l1 - l2, l1 / l2), with the ratio 0 when l2 = 0.
std::array<double, 4> length_features(const QuestionPair& p);

/// Shared lowercased words, optionally excluding stop-words; normalized by
/// the longer question's token count.
CountAndNorm common_word_features(const QuestionPair& p, const StopWordList* stop);

/// 1 when both questions end in the same lowercased word.
double last_word_feature(const QuestionPair& p);

/// Shared words starting with an uppercase letter (case-sensitive match).
CountAndNorm capitalized_features(const QuestionPair& p);

/// For k = 3, 4, 5, 6: shared lowercased k-prefixes (count, normalized).
std::array<double, 8> prefix_features(const QuestionPair& p);

/// not in q1, not in q2, not in both, shared digit character, shared Porter
/// stems (count, normalized).
std::array<double, 6> misc_features(const QuestionPair& p);

HandFeatureVector extract_all(const QuestionPair& p);

/// Row-major n x 25 matrix.
std::vector<HandFeatureVector> extract_all(const Dataset& d);

/// Headered CSV with the canonical column names.
void write_hand_features_csv(std::ostream& out, const std::vector<HandFeatureVector>& rows);

}  // namespace dupq
