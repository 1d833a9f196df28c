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
#include <span>
#include <string>
#include <vector>

namespace dupq {

/// Sorted column indices with strictly positive values.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double sum() const;
  bool operator==(const SparseVector&) const = default;
};

/// Read-only view of one CSR row.
struct SparseRow {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;
};

/// Compressed sparse row matrix.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t n_cols) : n_cols_(n_cols) {}

  void append_row(const SparseVector& row);

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return indices_.size(); }

  SparseRow row(std::size_t r) const {
    const auto b = offsets_[r], e = offsets_[r + 1];
    return {std::span(indices_).subspan(b, e - b), std::span(values_).subspan(b, e - b)};
  }

  /// Row-major dense copy (rows x cols).
  std::vector<double> to_dense() const;

  /// Binary layout, little-endian:
  ///   "DUPQCSR\0" | u32 version (1) | u64 rows | u64 cols | u64 nnz |
  ///   u64 offsets[rows + 1] | u32 indices[nnz] | f64 values[nnz]
  void save(const std::string& path) const;
  static SparseMatrix load(const std::string& path);

  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  const std::vector<std::uint32_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

double dot(const SparseRow& x, std::span<const double> w);

}  // namespace dupq
