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

#include "dupq/sparse.hpp"

#include <fstream>

#include "dupq/binary_io.hpp"

namespace dupq {

namespace {

constexpr char kMagic[9] = "DUPQCSR";
constexpr std::uint32_t kVersion = 1;

using bin::get;
using bin::get_array;
using bin::put;
using bin::put_array;

}  // namespace

double SparseVector::sum() const {
  double s = 0;
  for (double v : values) s += v;
  return s;
}

void SparseMatrix::append_row(const SparseVector& row) {
  indices_.insert(indices_.end(), row.indices.begin(), row.indices.end());
  values_.insert(values_.end(), row.values.begin(), row.values.end());
  offsets_.push_back(indices_.size());
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> out(rows() * n_cols_, 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (auto k = offsets_[r]; k < offsets_[r + 1]; ++k) out[r * n_cols_ + indices_[k]] = values_[k];
  }
  return out;
}

void SparseMatrix::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::put_header(out, kMagic, kVersion);
  put<std::uint64_t>(out, rows());
  put<std::uint64_t>(out, n_cols_);
  put<std::uint64_t>(out, nnz());
  put_array(out, offsets_);
  put_array(out, indices_);
  put_array(out, values_);
  if (!out) throw DataError("write failed: " + path);
}

SparseMatrix SparseMatrix::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::get_header(in, kMagic, kVersion, path);
  const auto rows = get<std::uint64_t>(in, path);
  SparseMatrix m(get<std::uint64_t>(in, path));
  const auto nnz = get<std::uint64_t>(in, path);
  get_array(in, m.offsets_, rows + 1, path);
  get_array(in, m.indices_, nnz, path);
  get_array(in, m.values_, nnz, path);
  if (m.offsets_.front() != 0 || m.offsets_.back() != nnz) throw DataError(path + ": corrupt offsets");
  for (std::size_t r = 0; r < rows; ++r) {
    if (m.offsets_[r] > m.offsets_[r + 1]) throw DataError(path + ": corrupt offsets");
    for (auto k = m.offsets_[r]; k < m.offsets_[r + 1]; ++k) {
      if (m.indices_[k] >= m.n_cols_ || (k > m.offsets_[r] && m.indices_[k] <= m.indices_[k - 1]))
        throw DataError(path + ": corrupt column indices");
    }
  }
  return m;
}

double dot(const SparseRow& x, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

}  // namespace dupq
