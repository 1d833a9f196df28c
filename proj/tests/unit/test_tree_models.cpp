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

#include <gtest/gtest.h>
#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <sstream>

#include "dupq/tree_models.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace dupq {
namespace {

std::span<const double> row(const DenseMatrix& X, Eigen::Index i) {
  return {X.row(i).data(), static_cast<std::size_t>(X.cols())};
}

// Small integer features so that many candidate splits tie exactly.
struct Fixture {
  DenseMatrix X;
  std::vector<int> y;
};

Fixture integer_fixture(int n, int features, int levels, std::uint64_t seed) {
  Rng rng(seed);
  Fixture f{DenseMatrix(n, features), {}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < features; ++j) f.X(i, j) = static_cast<double>(rng.uniform_index(levels));
    const bool signal = f.X(i, 0) + f.X(i, 1) > levels - 1;
    const bool flip = rng.uniform01() < 0.15;
    f.y.push_back((signal != flip) ? 1 : 0);
  }
  return f;
}

class CartOracle : public ::testing::TestWithParam<std::tuple<int, int, std::uint64_t>> {};

TEST_P(CartOracle, StructureMatchesBruteForce) {
  const auto [depth, leaf, seed] = GetParam();
  const Fixture f = integer_fixture(200, 4, 8, seed);
  TreeConfig cfg;
  if (depth >= 0) cfg.max_depth = depth;
  cfg.min_samples_leaf = leaf;
  const Tree got = fit_decision_tree(f.X, f.y, cfg);
  const Tree want = oracle::Cart(f.X, f.y, depth >= 0 ? depth : 1 << 20, leaf).build();
  ASSERT_EQ(got.nodes.size(), want.nodes.size());
  for (std::size_t k = 0; k < got.nodes.size(); ++k) EXPECT_EQ(got.nodes[k], want.nodes[k]) << "node " << k;
}

INSTANTIATE_TEST_SUITE_P(Grid, CartOracle,
                         ::testing::Combine(::testing::Values(-1, 1, 3, 10), ::testing::Values(1, 5, 20),
                                            ::testing::Values<std::uint64_t>(1, 2)));

TEST(DecisionTree, PureInputIsSingleLeaf) {
  DenseMatrix X(4, 2);
  X << 1, 2, 3, 4, 5, 6, 7, 8;
  const Tree t = fit_decision_tree(X, std::vector<int>{1, 1, 1, 1}, TreeConfig{});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.depth(), 0);
  EXPECT_EQ(t.nodes[0].value, 1.0);
}

TEST(DecisionTree, DepthTwoSeparatesXor) {
  DenseMatrix X(8, 2);
  X << 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> y{0, 0, 1, 1, 0, 0, 1, 1};
  TreeConfig cfg;
  cfg.max_depth = 2;
  const Tree t = fit_decision_tree(X, y, cfg);
  EXPECT_EQ(predict_labels(t, X), y);
  EXPECT_LE(t.depth(), 2);
}

TEST(DecisionTree, UnboundedTreeFitsDistinctRows) {
  const Fixture f = integer_fixture(150, 3, 1000, 4);
  const Tree t = fit_decision_tree(f.X, f.y, TreeConfig{});
  EXPECT_EQ(predict_labels(t, f.X), f.y);
}

TEST(DecisionTree, LeavesRespectMinimumSize) {
  const Fixture f = integer_fixture(300, 4, 50, 5);
  TreeConfig cfg;
  cfg.min_samples_leaf = 7;
  const Tree t = fit_decision_tree(f.X, f.y, cfg);
  double total = 0.0;
  for (const TreeNode& n : t.nodes) {
    if (n.is_leaf()) {
      EXPECT_GE(n.weight, 7.0);
      total += n.weight;
    } else {
      EXPECT_EQ(n.weight, t.nodes[static_cast<std::size_t>(n.left)].weight +
                              t.nodes[static_cast<std::size_t>(n.right)].weight);
    }
  }
  EXPECT_EQ(total, 300.0);
}

TEST(RandomForest, DegenerateForestEqualsSingleTree) {
  const Fixture f = integer_fixture(200, 4, 8, 6);
  TreeConfig cfg;
  cfg.max_depth = 6;
  cfg.n_estimators = 1;
  cfg.bootstrap = false;
  cfg.features_per_split = 4;
  const Forest forest = fit_random_forest(f.X, f.y, cfg);
  ASSERT_EQ(forest.trees.size(), 1u);
  EXPECT_EQ(forest.trees[0], fit_decision_tree(f.X, f.y, cfg));
}

TEST(RandomForest, SameSeedSamePredictions) {
  const Fixture f = integer_fixture(200, 6, 20, 7);
  TreeConfig cfg;
  cfg.n_estimators = 10;
  cfg.seed = 42;
  const Forest a = fit_random_forest(f.X, f.y, cfg), b = fit_random_forest(f.X, f.y, cfg);
  EXPECT_EQ(a.trees, b.trees);
  cfg.seed = 43;
  const Forest c = fit_random_forest(f.X, f.y, cfg);
  EXPECT_NE(a.trees, c.trees);
  for (Eigen::Index i = 0; i < f.X.rows(); ++i) {
    const double p = a.predict_proba(row(f.X, i));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(GradientBoosting, OneFullStepReducesLogLoss) {
  const Fixture f = integer_fixture(200, 4, 8, 8);
  TreeConfig cfg;
  cfg.max_depth = 3;
  cfg.n_estimators = 1;
  cfg.learning_rate = 1.0;
  std::vector<double> trace;
  const BoostedTrees m = fit_gradient_boosted(f.X, f.y, cfg, &trace);
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_LT(trace[1], trace[0]);
  const double prior = std::count(f.y.begin(), f.y.end(), 1) / 200.0;
  EXPECT_NEAR(m.init_score, std::log(prior / (1 - prior)), 1e-12);
}

TEST(GradientBoosting, LossFallsOverStages) {
  const Fixture f = integer_fixture(200, 4, 8, 9);
  TreeConfig cfg;
  cfg.max_depth = 3;
  cfg.n_estimators = 50;
  std::vector<double> trace;
  fit_gradient_boosted(f.X, f.y, cfg, &trace);
  ASSERT_EQ(trace.size(), 51u);
  EXPECT_LT(trace.back(), 0.8 * trace.front());
}

TEST(GradientBoosting, RawScoreIsInitPlusScaledTrees) {
  const Fixture f = integer_fixture(100, 3, 8, 10);
  TreeConfig cfg;
  cfg.max_depth = 2;
  cfg.n_estimators = 5;
  cfg.learning_rate = 0.3;
  const BoostedTrees m = fit_gradient_boosted(f.X, f.y, cfg);
  for (Eigen::Index i = 0; i < 10; ++i) {
    double s = m.init_score;
    for (const Tree& t : m.trees) s += 0.3 * t.predict(row(f.X, i));
    EXPECT_NEAR(m.raw_score(row(f.X, i)), s, 1e-12);
  }
}

TEST(LogLoss, HandValues) {
  const std::vector<double> p{0.5, 0.9};
  const std::vector<int> y{1, 0};
  EXPECT_NEAR(log_loss(p, y), (std::log(2.0) - std::log(0.1)) / 2, 1e-12);
}

TEST(TreeIo, SaveLoadRoundTrip) {
  testing::TempDir tmp("trees");
  const Fixture f = integer_fixture(100, 3, 8, 11);
  TreeConfig cfg;
  cfg.n_estimators = 3;
  cfg.max_depth = 3;
  const BoostedTrees m = fit_gradient_boosted(f.X, f.y, cfg);
  save_trees(TreeEnsemble{TreeEnsembleKind::boosted, m.init_score, m.learning_rate, m.trees}, tmp.file("t.bin"));
  const TreeEnsemble back = load_trees(tmp.file("t.bin"));
  EXPECT_EQ(back.kind, TreeEnsembleKind::boosted);
  EXPECT_EQ(back.init_score, m.init_score);
  EXPECT_EQ(back.trees, m.trees);
}

TEST(TreeConfig, Validation) {
  TreeConfig c;
  c.min_samples_leaf = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TreeConfig{};
  c.max_depth = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Ablation, RowsAccumulateGroups) {
  Rng rng(12);
  const Eigen::Index n = 120;
  DenseMatrix X(n, static_cast<Eigen::Index>(kNumHandFeatures));
  std::vector<int> y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = i % 3 == 0 ? 1 : 0;
    y.push_back(label);
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal() + (j == 0 ? 2.0 * label : 0.0);
  }
  AblationConfigs cfgs = AblationConfigs::defaults(1);
  cfgs.forest.n_estimators = 5;
  cfgs.boosted.n_estimators = 10;
  const std::vector<FeatureGroup> groups{FeatureGroup::L, FeatureGroup::LC, FeatureGroup::M};
  const auto rows = feature_ablation(groups, X, y, X, y, cfgs);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].num_features, 0);
  EXPECT_NEAR(rows[0].accuracy, 100.0 * 80.0 / 120.0, 1e-9);
  EXPECT_TRUE(std::isnan(rows[0].f_score));
  EXPECT_EQ(rows[1].features, "L");
  EXPECT_EQ(rows[3].features, "L, LC, M");
  int cols = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    cols += static_cast<int>(group_columns(groups[k - 1]).second);
    EXPECT_EQ(rows[k].num_features, cols);
    EXPECT_NEAR(rows[k].delta_accuracy, rows[k].accuracy - rows[k - 1].accuracy, 1e-12);
  }
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

}  // namespace
}  // namespace dupq
