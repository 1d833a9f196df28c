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

#include "dupq/csv.hpp"

namespace dupq::csv {

bool Reader::next(Record& rec) {
  rec.fields.clear();
  rec.error.clear();
  if (pos_ >= text_.size()) return false;
  rec.line = line_;

  std::string field;
  bool quoted = false;       // inside a quoted section
  bool was_quoted = false;   // current field began with a quote
  bool after_quote = false;  // just closed a quoted section
  const std::size_t n = text_.size();

  while (pos_ < n) {
    char c = text_[pos_];
    if (quoted) {
      if (c == '"') {
        if (pos_ + 1 < n && text_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
          continue;
        }
        quoted = false;
        after_quote = true;
        ++pos_;
        continue;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
      continue;
    }
    if (c == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
      was_quoted = after_quote = false;
      ++pos_;
      continue;
    }
    if (c == '\r' && pos_ + 1 < n && text_[pos_ + 1] == '\n') {
      ++pos_;
      continue;
    }
    if (c == '\n') {
      ++pos_;
      ++line_;
      rec.fields.push_back(std::move(field));
      return true;
    }
    if (c == '"') {
      if (field.empty() && !was_quoted) {
        quoted = was_quoted = true;
        ++pos_;
        continue;
      }
      if (rec.error.empty()) rec.error = "stray quote";
      field.push_back(c);
      ++pos_;
      continue;
    }
    if (after_quote && rec.error.empty()) rec.error = "text after closing quote";
    field.push_back(c);
    ++pos_;
  }
  if (quoted) rec.error = "unterminated quoted field";
  rec.fields.push_back(std::move(field));
  return true;
}

void write_field(std::ostream& out, std::string_view field) {
  bool needs_quotes = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

}  // namespace dupq::csv
