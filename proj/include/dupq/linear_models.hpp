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
#include "dupq/eval.hpp"
#include "dupq/sparse.hpp"

namespace dupq {

enum class Loss { logistic, hinge };

std::string to_string(Loss loss);
Loss parse_loss(const std::string& name);

struct SGDConfig {
  Loss loss = Loss::logistic;
  double alpha = 1e-5;
  int n_iter = 20;
  /// Schedule offset; 0 selects 10 / alpha.
  double t0 = 0.0;
  std::uint64_t seed = 0;

  double effective_t0() const { return t0 > 0 ? t0 : 10.0 / alpha; }
  void validate() const;  // throws ConfigError
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint64_t feature_space_hash = 0;

  std::size_t dim() const { return weights.size(); }
  bool operator==(const LinearModel&) const = default;
};

struct Prediction {
  int label;
  double score;
};

/// Optional training trace.
struct SGDTrace {
  std::vector<double> etas;          // one per update, in order
  std::vector<double> epoch_losses;  // mean per-example loss seen during each pass
};

/// Per-example SGD with step size 1 / (alpha * (t + t0)), t counting prior updates from 0.
/// Labels are 0/1. The bias is not regularized.
LinearModel train_sgd(const SparseMatrix& X, std::span<const int> y, const SGDConfig& cfg,
                      SGDTrace* trace = nullptr);

/// Same update rule on dense weights with explicit decay; reference for train_sgd.
LinearModel train_sgd_dense(const SparseMatrix& X, std::span<const int> y, const SGDConfig& cfg);

/// score = w.x + b; label 1 iff score > 0.
Prediction predict(const LinearModel& model, const SparseRow& x);
Prediction predict(const LinearModel& model, const SparseVector& x);
std::vector<int> predict_labels(const LinearModel& model, const SparseMatrix& X);

/// Sigmoid of the score.
double predict_proba(const LinearModel& model, const SparseRow& x);

/// Mean loss plus (alpha / 2) * |w|^2.
double objective(const LinearModel& model, const SparseMatrix& X, std::span<const int> y, Loss loss,
                 double alpha);

/// "DUPQLIN\0" | u32 version | u64 feature-space hash | u64 dim | f64 weights[dim] | f64 bias
void save_linear_model(const LinearModel& model, const std::string& path);
LinearModel load_linear_model(const std::string& path);

/// Trains one model per setting on the train matrix and scores it on the validation matrix.
std::vector<SweepRow> hyperparameter_sweep(const std::vector<SGDConfig>& grid, const SparseMatrix& X_train,
                                           std::span<const int> y_train, const SparseMatrix& X_valid,
                                           std::span<const int> y_valid);

}  // namespace dupq
