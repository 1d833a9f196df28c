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

// Little-endian helpers shared by the model and matrix file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dupq/common.hpp"

namespace dupq::bin {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated file " + path);
  return v;
}

template <typename T>
void get_array(std::istream& in, std::vector<T>& v, std::size_t n, const std::string& path) {
  constexpr std::size_t kLimit = std::size_t{1} << 36;
  if (n > kLimit / sizeof(T)) throw DataError("corrupt length in " + path);
  v.resize(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
    throw DataError("truncated file " + path);
}

inline std::string get_string(std::istream& in, const std::string& path) {
  const auto n = get<std::uint64_t>(in, path);
  std::vector<char> buf;
  get_array(in, buf, n, path);
  return std::string(buf.begin(), buf.end());
}

/// Writes an 8-byte magic and a u32 version.
inline void put_header(std::ostream& out, const char (&magic)[9], std::uint32_t version) {
  out.write(magic, 8);
  put(out, version);
}

/// Reads and checks the magic; returns the version, rejecting anything newer than `max_version`.
inline std::uint32_t get_header(std::istream& in, const char (&magic)[9], std::uint32_t max_version,
                                const std::string& path) {
  char buf[8];
  if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
    throw DataError(path + ": bad magic bytes");
  const auto version = get<std::uint32_t>(in, path);
  if (version == 0 || version > max_version)
    throw DataError(path + ": unsupported format version " + std::to_string(version));
  return version;
}

}  // namespace dupq::bin
