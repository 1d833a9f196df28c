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

#include "dupq/common.hpp"
#include "dupq/dense.hpp"

namespace dupq {

enum class Kernel { linear, rbf };

std::string to_string(Kernel k);
Kernel parse_kernel(const std::string& name);

struct KernelSVMConfig {
  double C = 1.0;
  Kernel kernel = Kernel::rbf;
  /// RBF coefficient; 0 selects 1 / feature count.
  double gamma = 0.0;
  /// Maximum SMO iterations; 0 means no limit.
  std::int64_t max_iter = 0;
  /// Stop once the maximal KKT violation falls below this.
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  /// Larger training sets are subsampled to this many rows.
  std::size_t row_cap = 50000;
  /// Kernel row cache budget.
  std::size_t cache_mb = 256;

  void validate() const;  // throws ConfigError
};

struct KernelSVMModel {
  Kernel kernel = Kernel::rbf;
  double gamma = 0.0;
  double C = 1.0;
  double bias = 0.0;
  DenseMatrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i, one per support vector

  std::size_t dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

struct SMOReport {
  std::int64_t iterations = 0;
  bool converged = false;
  double final_violation = 0.0;
  std::size_t rows_used = 0;
};

/// Soft-margin SVM dual solved by SMO with second-order working-set selection.
/// Labels are 0/1.
KernelSVMModel train_kernel_svm(const DenseMatrix& X, std::span<const int> y, const KernelSVMConfig& cfg,
                                Warnings* warnings = nullptr, SMOReport* report = nullptr);

double decision_value(const KernelSVMModel& model, std::span<const double> x);
std::vector<int> predict_labels(const KernelSVMModel& model, const DenseMatrix& X);

/// "DUPQSVM\0" | u32 version | u32 kernel | f64 gamma | f64 C | f64 bias | u64 n_sv | u64 dim |
/// f64 dual_coef[n_sv] | f64 sv[n_sv * dim]
void save_kernel_svm(const KernelSVMModel& model, const std::string& path);
KernelSVMModel load_kernel_svm(const std::string& path);

}  // namespace dupq
