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

#include "dupq/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <ostream>

#include "dupq/common.hpp"

namespace dupq {
namespace text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

// Clitics split off by the tokenizer, compared lowercase.
bool is_clitic(std::u32string_view s) {
  static constexpr std::array<std::u32string_view, 7> kClitics = {U"s", U"t", U"re", U"ve",
                                                                   U"ll", U"d", U"m"};
  if (s.empty() || s.size() > 2) return false;
  std::u32string lower;
  for (char32_t c : s) lower.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
  return std::find(kClitics.begin(), kClitics.end(), lower) != kClitics.end();
}

// Replacement for common typographic characters; nullptr when unmapped.
const char* ascii_fallback(char32_t cp) {
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
    case 0x2039: case 0x203A: case 0x00B4: case 0x02BC:
      return "'";
    case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
    case 0x00AB: case 0x00BB:
      return "\"";
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
    case 0x2015: case 0x2212:
      return "-";
    case 0x2026:
      return "...";
    case 0x00A0: case 0x2000: case 0x2001: case 0x2002: case 0x2003:
    case 0x2004: case 0x2005: case 0x2006: case 0x2007: case 0x2008:
    case 0x2009: case 0x200A: case 0x202F: case 0x205F: case 0x3000:
      return " ";
    case 0x200B: case 0x200C: case 0x200D: case 0xFEFF:
      return "";
    case 0xFF1F:
      return "?";
    case 0xFF01:
      return "!";
    case 0xFF0C:
      return ",";
    default:
      return nullptr;
  }
}

}  // namespace

bool is_punctuation(char32_t cp) {
  if (cp < 128) {
    return cp > 32 && cp < 127 && !(cp >= '0' && cp <= '9') && !(cp >= 'a' && cp <= 'z') &&
           !(cp >= 'A' && cp <= 'Z');
  }
  switch (u_charType(static_cast<UChar32>(cp))) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

bool is_space(char32_t cp) {
  if (cp < 128) return cp == ' ' || (cp >= 0x09 && cp <= 0x0D);
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_decimal_digit(char32_t cp) {
  return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

bool is_uppercase_letter(char32_t cp) {
  if (cp < 128) return cp >= 'A' && cp <= 'Z';
  return u_isupper(static_cast<UChar32>(cp)) || u_istitle(static_cast<UChar32>(cp));
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(s.data());
  const std::int32_t length = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? kReplacement : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    std::uint8_t buf[4];
    std::int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, 4, static_cast<UChar32>(c), err);
    if (err) {
      len = 0;
      U8_APPEND_UNSAFE(buf, len, kReplacement);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

TokenSequence tokenize(std::string_view input) {
  TokenSequence out;
  const std::u32string cps = decode_utf8(input);
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(cps[i])) ++i;
    std::size_t end = i;
    while (end < n && !is_space(cps[end])) ++end;
    if (end == i) break;
    std::u32string_view chunk(cps.data() + i, end - i);
    i = end;

    std::size_t lo = 0, hi = chunk.size();
    while (lo < hi && is_punctuation(chunk[lo])) {
      out.push_back(encode_utf8(chunk.substr(lo, 1)));
      ++lo;
    }
    std::size_t trail = hi;
    while (trail > lo && is_punctuation(chunk[trail - 1])) --trail;
    if (trail > lo) {
      std::u32string_view core = chunk.substr(lo, trail - lo);
      std::size_t split = std::u32string_view::npos;
      for (std::size_t k = core.size(); k-- > 1;) {
        if (is_apostrophe(core[k])) {
          if (is_clitic(core.substr(k + 1))) split = k;
          break;
        }
      }
      if (split != std::u32string_view::npos) {
        out.push_back(encode_utf8(core.substr(0, split)));
        out.push_back(encode_utf8(core.substr(split)));
      } else {
        out.push_back(encode_utf8(core));
      }
    }
    for (std::size_t k = trail; k < hi; ++k) out.push_back(encode_utf8(chunk.substr(k, 1)));
  }
  return out;
}

std::string join(const TokenSequence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string lowercase(std::string_view input) {
  bool ascii = true;
  for (unsigned char c : input) {
    if (c > 127) {
      ascii = false;
      break;
    }
  }
  if (ascii) {
    std::string out(input);
    for (char& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  }
  std::u32string cps = decode_utf8(input);
  for (char32_t& c : cps) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
  return encode_utf8(cps);
}

const char* to_string(Step step) {
  switch (step) {
    case Step::replace_punc: return "replace_punc";
    case Step::remove_punc: return "remove_punc";
    case Step::remove_digits: return "remove_digits";
    case Step::fix_non_ascii: return "fix_non_ascii";
    case Step::remove_non_ascii: return "remove_non_ascii";
    case Step::lowercase: return "lowercase";
  }
  return "?";
}

Step parse_step(std::string_view name) {
  for (Step s : {Step::replace_punc, Step::remove_punc, Step::remove_digits, Step::fix_non_ascii,
                 Step::remove_non_ascii, Step::lowercase}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown preprocessing step '" + std::string(name) + "'");
}

std::string apply_step(Step step, std::string_view input) {
  switch (step) {
    case Step::lowercase:
      return lowercase(input);
    case Step::remove_non_ascii: {
      std::string out;
      out.reserve(input.size());
      for (char c : input)
        if (static_cast<unsigned char>(c) < 128) out.push_back(c);
      return out;
    }
    default:
      break;
  }
  const std::u32string cps = decode_utf8(input);
  std::u32string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    switch (step) {
      case Step::remove_punc:
        if (!is_punctuation(c)) out.push_back(c);
        break;
      case Step::replace_punc:
        out.push_back(is_punctuation(c) ? U' ' : c);
        break;
      case Step::remove_digits:
        if (!is_decimal_digit(c)) out.push_back(c);
        break;
      case Step::fix_non_ascii: {
        const char* repl = c >= 128 ? ascii_fallback(c) : nullptr;
        if (repl == nullptr) {
          out.push_back(c);
        } else {
          for (const char* p = repl; *p; ++p) out.push_back(static_cast<char32_t>(*p));
        }
        break;
      }
      default:
        out.push_back(c);
    }
  }
  return encode_utf8(out);
}

std::string Pipeline::apply(std::string_view input) const {
  std::string cur(input);
  for (Step s : steps) cur = apply_step(s, cur);
  return cur;
}

std::string Pipeline::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out.push_back(',');
    out += text::to_string(steps[i]);
  }
  return out;
}

Pipeline Pipeline::parse(std::string_view spec) {
  Pipeline p;
  while (!spec.empty()) {
    const std::size_t comma = spec.find(',');
    std::string_view name = spec.substr(0, comma);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty() && name != "none") p.steps.push_back(parse_step(name));
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  return p;
}

TokenSequence preprocess_tokens(const Pipeline& p, std::string_view input) {
  return tokenize(p.apply(input));
}

}  // namespace text

Vocabulary Vocabulary::build(const std::vector<TokenSequence>& corpus) {
  Vocabulary v;
  for (const auto& seq : corpus) v.add(seq);
  v.finalize();
  return v;
}

void Vocabulary::add(const TokenSequence& tokens) {
  for (const auto& t : tokens) ++pending_[t];
}

void Vocabulary::finalize() {
  std::vector<std::pair<std::string, std::uint64_t>> entries(pending_.begin(), pending_.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  tokens_.clear();
  counts_.clear();
  index_.clear();
  index_.reserve(entries.size());
  for (auto& [tok, c] : entries) {
    index_.emplace(tok, tokens_.size());
    tokens_.push_back(std::move(tok));
    counts_.push_back(c);
  }
}

std::int64_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kMissing : static_cast<std::int64_t>(it->second);
}

std::uint64_t Vocabulary::count(std::string_view token) const {
  const std::int64_t i = id(token);
  return i == kMissing ? 0 : counts_[static_cast<std::size_t>(i)];
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

}  // namespace dupq
