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

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dupq::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
  std::string error;     // non-empty when the record is malformed
};

/// RFC-4180 reader over an in-memory buffer. Quoted fields may contain
/// commas, doubled quotes and line breaks. Both LF and CRLF row endings are
/// accepted.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  /// Reads the next record. Returns false at end of input.
  bool next(Record& rec);

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

/// Writes one field, quoting when needed.
void write_field(std::ostream& out, std::string_view field);

/// Writes a full row terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace dupq::csv
