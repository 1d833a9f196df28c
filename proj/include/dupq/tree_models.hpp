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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dupq/common.hpp"
#include "dupq/dense.hpp"
#include "dupq/eval.hpp"
#include "dupq/hand_features.hpp"

namespace dupq {

/// Internal when feature >= 0, leaf otherwise. Samples with x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Positive-class fraction (classification) or additive score (boosting).
  double value = 0.0;
  /// Total sample weight that reached this node during fitting.
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes in preorder; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

struct TreeConfig {
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  int n_estimators = 1;
  double learning_rate = 0.1;
  /// Features examined per split; 0 selects all (tree, boosting) or ceil(sqrt(F)) (forest).
  int features_per_split = 0;
  /// Forest only: draw a bootstrap sample per tree.
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

/// Greedy CART with weighted Gini impurity. Ties between candidate splits go to the lowest
/// feature index, then the smallest threshold.
Tree fit_decision_tree(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg);

struct Forest {
  std::vector<Tree> trees;

  double predict_proba(std::span<const double> x) const;
};

Forest fit_random_forest(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg);

struct BoostedTrees {
  double init_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;

  double raw_score(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const { return sigmoid(raw_score(x)); }
};

/// Logistic-loss gradient boosting. `loss_trace` receives the training log-loss of the
/// constant model followed by one entry per stage.
BoostedTrees fit_gradient_boosted(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg,
                                  std::vector<double>* loss_trace = nullptr);

/// Mean binary log-loss of probabilities `p` (clipped to [1e-15, 1 - 1e-15]).
double log_loss(std::span<const double> p, std::span<const int> y);

std::vector<int> predict_labels(const Tree& tree, const DenseMatrix& X);
std::vector<int> predict_labels(const Forest& forest, const DenseMatrix& X);
std::vector<int> predict_labels(const BoostedTrees& model, const DenseMatrix& X);

/// Preorder binary encoding shared by all three model kinds:
///   "DUPQTRE\0" | u32 version | u32 kind (0 tree, 1 forest, 2 boosted) | f64 init | f64 rate |
///   u64 n_trees | per tree: u64 n_nodes, then per node in preorder
///   u8 leaf | f64 weight | (leaf: f64 value) (internal: i32 feature, f64 threshold)
enum class TreeEnsembleKind : std::uint32_t { tree = 0, forest = 1, boosted = 2 };
struct TreeEnsemble {
  TreeEnsembleKind kind = TreeEnsembleKind::tree;
  double init_score = 0.0;
  double learning_rate = 0.0;
  std::vector<Tree> trees;
};
void save_trees(const TreeEnsemble& model, const std::string& path);
TreeEnsemble load_trees(const std::string& path);

/// Column subset of X.
DenseMatrix select_columns(const DenseMatrix& X, const std::vector<int>& columns);

struct AblationConfigs {
  TreeConfig tree;
  TreeConfig forest;
  TreeConfig boosted;

  /// depth 10 / leaf 5; unbounded depth / leaf 5 / 50 trees; depth 4 / 500 stages.
  static AblationConfigs defaults(std::uint64_t seed = 0);
};

struct AblationRow {
  std::string features;  // e.g. "L, LC"
  int num_features = 0;
  double accuracy = 0.0;
  double delta_accuracy = 0.0;  // vs previous row; NaN on the first row
  double f_score = 0.0;         // NaN when undefined (majority-class row)
  double delta_f_score = 0.0;
};

/// For each prefix of `groups` (including the empty prefix, scored as the majority class),
/// trains a tree, a forest and a boosted model on the prefix's columns and reports the mean
/// validation accuracy and F-score of the three.
std::vector<AblationRow> feature_ablation(const std::vector<FeatureGroup>& groups, const DenseMatrix& X_train,
                                          std::span<const int> y_train, const DenseMatrix& X_valid,
                                          std::span<const int> y_valid, const AblationConfigs& configs);

/// Columns: features,num_features,accuracy,delta_accuracy,f_score,delta_f_score
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace dupq
