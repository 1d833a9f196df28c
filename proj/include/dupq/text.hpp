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

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dupq {

/// Tokens of one question; no token is empty.
using TokenSequence = std::vector<std::string>;

namespace text {

/// Punctuation: Unicode general categories P* plus every printable ASCII
/// character that is neither alphanumeric nor a space.
bool is_punctuation(char32_t cp);
bool is_space(char32_t cp);
bool is_decimal_digit(char32_t cp);
bool is_uppercase_letter(char32_t cp);

/// Decodes UTF-8. Invalid bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Whitespace split, then leading and trailing punctuation become single
/// character tokens and a trailing contraction is split off at its
/// apostrophe ("what's" -> "what" "'s"). Case is preserved.
TokenSequence tokenize(std::string_view text);

/// Tokens joined by single spaces.
std::string join(const TokenSequence& tokens);

std::string lowercase(std::string_view text);

enum class Step { replace_punc, remove_punc, remove_digits, fix_non_ascii, remove_non_ascii, lowercase };

const char* to_string(Step step);
Step parse_step(std::string_view name);

/// Ordered preprocessing steps, applied left to right.
struct Pipeline {
  std::vector<Step> steps;

  std::string apply(std::string_view text) const;

  /// Comma-separated step names; "" for the empty pipeline.
  std::string to_string() const;
  static Pipeline parse(std::string_view spec);

  bool operator==(const Pipeline&) const = default;
};

std::string apply_step(Step step, std::string_view text);

/// Preprocess then tokenize.
TokenSequence preprocess_tokens(const Pipeline& p, std::string_view text);

}  // namespace text

/// Dense token ids. Ids are assigned by descending count, ties broken by
/// byte-wise lexicographic order, so id 0 is the most frequent token.
class Vocabulary {
 public:
  static constexpr std::int64_t kMissing = -1;

  static Vocabulary build(const std::vector<TokenSequence>& corpus);

  /// Incremental counting; call finalize() before lookups.
  void add(const TokenSequence& tokens);
  void finalize();

  std::size_t size() const { return tokens_.size(); }
  std::int64_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::uint64_t count(std::size_t id) const { return counts_.at(id); }
  std::uint64_t count(std::string_view token) const;

  /// Two-column TSV: token, count in id order.
  void write_tsv(std::ostream& out) const;

 private:
  std::unordered_map<std::string, std::uint64_t> pending_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace dupq
