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

#include "dupq/hand_features.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "dupq/common.hpp"
#include "dupq/porter_stemmer.hpp"

namespace dupq {

const std::array<const char*, kNumHandFeatures> kHandFeatureNames = {
    "len_q1",           "len_q2",           "len_diff",          "len_ratio",
    "common_lower",     "common_lower_norm", "common_nostop",    "common_nostop_norm",
    "same_last_word",   "common_cap",       "common_cap_norm",   "common_prefix3",
    "common_prefix3_norm", "common_prefix4", "common_prefix4_norm", "common_prefix5",
    "common_prefix5_norm", "common_prefix6", "common_prefix6_norm", "not_q1",
    "not_q2",           "not_both",         "same_digit",        "common_stem",
    "common_stem_norm"};

namespace {

constexpr std::array<const char*, 7> kGroupNames = {"L", "LC", "LCXS", "LW", "CAP", "PRE", "M"};
constexpr std::array<std::size_t, 7> kGroupFirst = {0, 4, 6, 8, 9, 11, 19};
constexpr std::array<std::size_t, 7> kGroupSize = {4, 2, 2, 1, 2, 8, 6};

// Version 1 of the bundled list. Changing it requires bumping kVersion and
// the pinned hash in the tests.
constexpr const char* kStopWords[] = {
    "a",       "about",    "above",     "after",     "again",      "against", "all",
    "also",    "am",       "an",        "and",       "any",        "are",     "arent",
    "as",      "at",       "be",        "because",   "been",       "before",  "being",
    "below",   "between",  "both",      "but",       "by",         "can",     "cant",
    "could",   "d",        "did",       "didnt",     "do",         "does",    "doesnt",
    "doing",   "don",      "dont",      "down",      "during",     "each",    "few",
    "for",     "from",     "further",   "had",       "has",        "have",    "having",
    "he",      "her",      "here",      "hers",      "herself",    "him",     "himself",
    "his",     "how",      "i",         "if",        "im",         "in",      "into",
    "is",      "isnt",     "it",        "its",       "itself",     "ive",     "just",
    "ll",      "m",        "may",       "me",        "might",      "more",    "most",
    "much",    "must",     "my",        "myself",    "nor",        "now",     "of",
    "off",     "on",       "once",      "only",      "or",         "other",   "our",
    "ours",    "ourselves", "out",      "over",      "own",        "re",      "s",
    "same",    "shall",    "she",       "should",    "so",         "some",    "such",
    "t",       "than",     "that",      "thats",     "the",        "their",   "theirs",
    "them",    "themselves", "then",    "there",     "these",      "they",    "this",
    "those",   "through",  "to",        "too",       "under",      "until",   "up",
    "ve",      "very",     "was",       "wasnt",     "we",         "were",    "werent",
    "what",    "whats",    "when",      "where",     "which",      "while",   "who",
    "whom",    "why",      "will",      "with",      "would",      "you",     "your",
    "youre",   "yours",    "yourself",  "yourselves"};

struct Prepared {
  TokenSequence t1, t2;
  std::vector<std::string> lower1, lower2;

  explicit Prepared(const QuestionPair& p)
      : t1(hand_feature_tokens(p.question1)), t2(hand_feature_tokens(p.question2)) {
    for (const auto& t : t1) lower1.push_back(text::lowercase(t));
    for (const auto& t : t2) lower2.push_back(text::lowercase(t));
  }

  double longest() const { return static_cast<double>(std::max(t1.size(), t2.size())); }

  CountAndNorm normalize(std::size_t count) const {
    const double m = longest();
    return {static_cast<double>(count), m > 0 ? static_cast<double>(count) / m : 0.0};
  }
};

template <typename Set>
std::size_t intersection_size(const Set& a, const Set& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.contains(x);
  return n;
}

std::set<std::string> lower_set(const std::vector<std::string>& lower, const StopWordList* stop) {
  std::set<std::string> s;
  for (const auto& w : lower)
    if (stop == nullptr || !stop->contains(w)) s.insert(w);
  return s;
}

CountAndNorm common_words(const Prepared& pp, const StopWordList* stop) {
  return pp.normalize(intersection_size(lower_set(pp.lower1, stop), lower_set(pp.lower2, stop)));
}

double last_word(const Prepared& pp) {
  if (pp.lower1.empty() || pp.lower2.empty()) return 0.0;
  return pp.lower1.back() == pp.lower2.back() ? 1.0 : 0.0;
}

CountAndNorm capitalized(const Prepared& pp) {
  auto caps = [](const TokenSequence& toks) {
    std::set<std::string> s;
    for (const auto& t : toks) {
      const std::u32string cps = text::decode_utf8(t);
      if (!cps.empty() && text::is_uppercase_letter(cps.front())) s.insert(t);
    }
    return s;
  };
  return pp.normalize(intersection_size(caps(pp.t1), caps(pp.t2)));
}

std::array<double, 8> prefixes(const Prepared& pp) {
  std::array<double, 8> out{};
  for (std::size_t k = 3; k <= 6; ++k) {
    auto pre = [k](const std::vector<std::string>& words) {
      std::set<std::u32string> s;
      for (const auto& w : words) {
        const std::u32string cps = text::decode_utf8(w);
        if (cps.size() >= k) s.insert(cps.substr(0, k));
      }
      return s;
    };
    const CountAndNorm c = pp.normalize(intersection_size(pre(pp.lower1), pre(pp.lower2)));
    out[2 * (k - 3)] = c.count;
    out[2 * (k - 3) + 1] = c.normalized;
  }
  return out;
}

std::array<double, 6> misc(const Prepared& pp) {
  auto has_not = [](const std::vector<std::string>& words) {
    return std::find(words.begin(), words.end(), "not") != words.end();
  };
  auto digits = [](const TokenSequence& toks) {
    std::set<char32_t> s;
    for (const auto& t : toks)
      for (char32_t c : text::decode_utf8(t))
        if (text::is_decimal_digit(c)) s.insert(c);
    return s;
  };
  auto stems = [](const std::vector<std::string>& words) {
    std::set<std::string> s;
    for (const auto& w : words) s.insert(porter_stem(w));
    return s;
  };
  const bool n1 = has_not(pp.lower1), n2 = has_not(pp.lower2);
  const bool digit = intersection_size(digits(pp.t1), digits(pp.t2)) > 0;
  const CountAndNorm st = pp.normalize(intersection_size(stems(pp.lower1), stems(pp.lower2)));
  return {n1 ? 1.0 : 0.0, n2 ? 1.0 : 0.0, (n1 && n2) ? 1.0 : 0.0, digit ? 1.0 : 0.0, st.count,
          st.normalized};
}

std::array<double, 4> lengths(const Prepared& pp) {
  const double l1 = static_cast<double>(pp.t1.size());
  const double l2 = static_cast<double>(pp.t2.size());
  return {l1, l2, l1 - l2, l2 > 0 ? l1 / l2 : 0.0};
}

}  // namespace

const char* to_string(FeatureGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

FeatureGroup parse_feature_group(std::string_view name) {
  for (std::size_t i = 0; i < kGroupNames.size(); ++i)
    if (name == kGroupNames[i]) return static_cast<FeatureGroup>(i);
  throw ConfigError("unknown feature group '" + std::string(name) + "'");
}

std::pair<std::size_t, std::size_t> group_columns(FeatureGroup g) {
  const auto i = static_cast<std::size_t>(g);
  return {kGroupFirst[i], kGroupSize[i]};
}

const StopWordList& StopWordList::bundled() {
  static const StopWordList list = [] {
    StopWordList l;
    for (const char* w : kStopWords) l.words_.insert(w);
    return l;
  }();
  return list;
}

std::uint64_t StopWordList::hash() const {
  Fnv1a h;
  for (const auto& w : words_) {
    h.update(w);
    h.update("\n");
  }
  return h.digest();
}

TokenSequence hand_feature_tokens(std::string_view question) {
  return text::tokenize(text::apply_step(text::Step::remove_punc, question));
}

std::array<double, 4> length_features(const QuestionPair& p) { return lengths(Prepared(p)); }

CountAndNorm common_word_features(const QuestionPair& p, const StopWordList* stop) {
  return common_words(Prepared(p), stop);
}

double last_word_feature(const QuestionPair& p) { return last_word(Prepared(p)); }

CountAndNorm capitalized_features(const QuestionPair& p) { return capitalized(Prepared(p)); }

std::array<double, 8> prefix_features(const QuestionPair& p) { return prefixes(Prepared(p)); }

std::array<double, 6> misc_features(const QuestionPair& p) { return misc(Prepared(p)); }

HandFeatureVector extract_all(const QuestionPair& p) {
  const Prepared pp(p);
  HandFeatureVector v{};
  auto out = v.begin();
  for (double x : lengths(pp)) *out++ = x;
  const CountAndNorm lc = common_words(pp, nullptr);
  *out++ = lc.count;
  *out++ = lc.normalized;
  const CountAndNorm lcxs = common_words(pp, &StopWordList::bundled());
  *out++ = lcxs.count;
  *out++ = lcxs.normalized;
  *out++ = last_word(pp);
  const CountAndNorm cap = capitalized(pp);
  *out++ = cap.count;
  *out++ = cap.normalized;
  for (double x : prefixes(pp)) *out++ = x;
  for (double x : misc(pp)) *out++ = x;
  return v;
}

std::vector<HandFeatureVector> extract_all(const Dataset& d) {
  std::vector<HandFeatureVector> rows;
  rows.reserve(d.size());
  for (const auto& p : d) rows.push_back(extract_all(p));
  return rows;
}

void write_hand_features_csv(std::ostream& out, const std::vector<HandFeatureVector>& rows) {
  for (std::size_t i = 0; i < kNumHandFeatures; ++i) out << (i ? "," : "") << kHandFeatureNames[i];
  out << '\n';
  out << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < kNumHandFeatures; ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

}  // namespace dupq
