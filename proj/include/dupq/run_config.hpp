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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dupq {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

/// Every accepted key with its default. Keys outside this list are rejected.
const std::vector<ConfigKey>& config_keys();

/// Flat key = value configuration.
class RunConfig {
 public:
  /// All keys at their defaults.
  RunConfig();

  /// `key = value` lines; blank lines and lines starting with '#' are ignored, as is
  /// anything after " #" on a line. Throws ConfigError on unknown keys or bad lines.
  static RunConfig parse(std::string_view text, const std::string& source = "<config>");
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  void merge_file(const std::string& path);

  bool has(const std::string& key) const;
  /// True when the value differs from the built-in default or was set explicitly.
  bool is_set(const std::string& key) const;

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// Empty value or "none" gives nullopt.
  std::optional<std::int64_t> optional_integer(const std::string& key) const;
  /// Comma-separated list; empty value gives an empty list.
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;

  /// Fully resolved configuration in key order, one `key = value` per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace dupq
