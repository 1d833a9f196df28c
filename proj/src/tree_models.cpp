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

#include "dupq/tree_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "dupq/binary_io.hpp"

namespace dupq {

namespace {

constexpr char kMagic[9] = "DUPQTRE";
constexpr std::uint32_t kVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Criterion { gini, squared_error };

// Split candidates are compared with this relative slack so that ties resolve by order.
constexpr double kTieSlack = 1e-12;

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return m < b ? m : a;
}

// CART on presorted index arrays. Each node owns the same range [b, e) of every feature's
// sorted array; a split stably partitions all of them.
class TreeBuilder {
 public:
  using LeafValue = std::function<double(std::span<const std::uint32_t>)>;

  TreeBuilder(const DenseMatrix& X, std::span<const double> target, std::span<const double> weight,
              Criterion criterion, const TreeConfig& cfg, int features_per_split, Rng* rng, LeafValue leaf_value)
      : X_(X),
        target_(target),
        weight_(weight),
        criterion_(criterion),
        max_depth_(cfg.max_depth.value_or(std::numeric_limits<int>::max())),
        min_leaf_(static_cast<double>(cfg.min_samples_leaf)),
        n_features_(static_cast<int>(X.cols())),
        features_per_split_(features_per_split <= 0 || features_per_split > n_features_ ? n_features_
                                                                                        : features_per_split),
        rng_(rng),
        leaf_value_(std::move(leaf_value)) {}

  Tree build() {
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < weight_.size(); ++i) {
      if (weight_[i] > 0) active.push_back(static_cast<std::uint32_t>(i));
    }
    sorted_.assign(static_cast<std::size_t>(n_features_), {});
    for (int f = 0; f < n_features_; ++f) {
      auto& s = sorted_[static_cast<std::size_t>(f)];
      s = active;
      std::stable_sort(s.begin(), s.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    goes_left_.assign(weight_.size(), 0);
    buffer_.resize(active.size());
    Tree tree;
    if (active.empty()) {
      tree.nodes.push_back(TreeNode{});
      return tree;
    }
    grow(tree, 0, active.size(), 0);
    return tree;
  }

 private:
  double x(std::uint32_t i, int f) const { return X_(static_cast<Eigen::Index>(i), f); }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
  };

  // Larger is better: sum over children of (P^2 + N^2) / W for Gini, S^2 / W for squared error.
  double child_gain(double w, double s) const {
    if (criterion_ == Criterion::gini) return (s * s + (w - s) * (w - s)) / w;
    return s * s / w;
  }

  bool is_pure(std::size_t b, std::size_t e) const {
    const auto& s = sorted_[0];
    const double first = target_[s[b]];
    for (std::size_t k = b + 1; k < e; ++k) {
      if (target_[s[k]] != first) return false;
    }
    return true;
  }

  std::vector<int> candidate_features() {
    std::vector<int> f(static_cast<std::size_t>(n_features_));
    std::iota(f.begin(), f.end(), 0);
    if (features_per_split_ < n_features_ && rng_ != nullptr) {
      // Partial Fisher-Yates draw, then ascending order for tie-breaking.
      for (int k = 0; k < features_per_split_; ++k) {
        const auto j = static_cast<std::size_t>(k) + rng_->uniform_index(static_cast<std::uint64_t>(n_features_ - k));
        std::swap(f[static_cast<std::size_t>(k)], f[j]);
      }
      f.resize(static_cast<std::size_t>(features_per_split_));
      std::sort(f.begin(), f.end());
    }
    return f;
  }

  Split best_split(std::size_t b, std::size_t e, double W, double S) {
    Split best;
    for (int f : candidate_features()) {
      const auto& s = sorted_[static_cast<std::size_t>(f)];
      double wl = 0.0, sl = 0.0;
      for (std::size_t k = b; k + 1 < e; ++k) {
        const std::uint32_t i = s[k];
        wl += weight_[i];
        sl += weight_[i] * target_[i];
        const double a = x(i, f), c = x(s[k + 1], f);
        if (!(a < c)) continue;
        const double wr = W - wl;
        if (wl < min_leaf_ || wr < min_leaf_) continue;
        const double gain = child_gain(wl, sl) + child_gain(wr, S - sl);
        if (best.feature < 0 || gain > best.gain + kTieSlack * std::max(1.0, std::abs(best.gain))) {
          best = Split{f, midpoint(a, c), gain};
        }
      }
    }
    return best;
  }

  std::int32_t grow(Tree& tree, std::size_t b, std::size_t e, int depth) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    double W = 0.0, S = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const std::uint32_t i = sorted_[0][k];
      W += weight_[i];
      S += weight_[i] * target_[i];
    }
    tree.nodes[static_cast<std::size_t>(id)].weight = W;

    Split split;
    if (depth < max_depth_ && W >= 2.0 * min_leaf_ && !is_pure(b, e)) split = best_split(b, e, W, S);
    if (split.feature < 0) {
      tree.nodes[static_cast<std::size_t>(id)].value =
          leaf_value_(std::span<const std::uint32_t>(sorted_[0]).subspan(b, e - b));
      return id;
    }

    // Stable partition of every feature's range.
    std::size_t n_left = 0;
    for (std::size_t k = b; k < e; ++k) {
      const std::uint32_t i = sorted_[0][k];
      goes_left_[i] = x(i, split.feature) <= split.threshold;
      n_left += goes_left_[i];
    }
    for (auto& s : sorted_) {
      std::size_t l = 0, r = n_left;
      for (std::size_t k = b; k < e; ++k) {
        if (goes_left_[s[k]]) buffer_[l++] = s[k];
        else buffer_[r++] = s[k];
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(e - b), s.begin() + static_cast<std::ptrdiff_t>(b));
    }

    {
      TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
    }
    const std::int32_t left = grow(tree, b, b + n_left, depth + 1);
    const std::int32_t right = grow(tree, b + n_left, e, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  const DenseMatrix& X_;
  std::span<const double> target_;
  std::span<const double> weight_;
  Criterion criterion_;
  int max_depth_;
  double min_leaf_;
  int n_features_;
  int features_per_split_;
  Rng* rng_;
  LeafValue leaf_value_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> buffer_;
};

void check_inputs(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("tree fit: row count does not match label count");
  if (!X.allFinite()) throw std::invalid_argument("tree fit: non-finite feature value");
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("tree fit: labels must be 0 or 1");
  }
}

Tree fit_classifier(const DenseMatrix& X, std::span<const int> y, std::span<const double> weight,
                    const TreeConfig& cfg, int features_per_split, Rng* rng) {
  std::vector<double> target(y.begin(), y.end());
  auto leaf = [&](std::span<const std::uint32_t> idx) {
    double w = 0.0, p = 0.0;
    for (std::uint32_t i : idx) {
      w += weight[i];
      p += weight[i] * target[i];
    }
    return w > 0 ? p / w : 0.0;
  };
  TreeBuilder builder(X, target, weight, Criterion::gini, cfg, features_per_split, rng, leaf);
  return builder.build();
}

template <typename Model>
std::vector<int> threshold_labels(const Model& predict_fn, const DenseMatrix& X) {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  const auto d = static_cast<std::size_t>(X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    out[static_cast<std::size_t>(r)] = predict_fn(std::span<const double>(X.row(r).data(), d)) > 0.5 ? 1 : 0;
  return out;
}

void write_tree(std::ostream& out, const Tree& tree) {
  bin::put<std::uint64_t>(out, tree.nodes.size());
  // Nodes are stored in preorder already; children are implied by the order.
  for (const TreeNode& n : tree.nodes) {
    bin::put<std::uint8_t>(out, n.is_leaf() ? 1 : 0);
    bin::put(out, n.weight);
    if (n.is_leaf()) {
      bin::put(out, n.value);
    } else {
      bin::put(out, n.feature);
      bin::put(out, n.threshold);
    }
  }
}

Tree read_tree(std::istream& in, const std::string& path) {
  const auto count = bin::get<std::uint64_t>(in, path);
  if (count == 0 || count > (std::uint64_t{1} << 31)) throw DataError(path + ": bad node count");
  Tree tree;
  tree.nodes.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    TreeNode n;
    const auto leaf = bin::get<std::uint8_t>(in, path);
    n.weight = bin::get<double>(in, path);
    if (leaf != 0) {
      n.value = bin::get<double>(in, path);
    } else {
      n.feature = bin::get<std::int32_t>(in, path);
      if (n.feature < 0) throw DataError(path + ": bad feature index");
      n.threshold = bin::get<double>(in, path);
    }
    tree.nodes.push_back(n);
  }
  // Rebuild child links from preorder.
  std::size_t next = 0;
  std::function<std::int32_t()> link = [&]() -> std::int32_t {
    if (next >= tree.nodes.size()) throw DataError(path + ": truncated tree");
    const auto id = static_cast<std::int32_t>(next++);
    if (!tree.nodes[static_cast<std::size_t>(id)].is_leaf()) {
      const std::int32_t l = link();
      const std::int32_t r = link();
      tree.nodes[static_cast<std::size_t>(id)].left = l;
      tree.nodes[static_cast<std::size_t>(id)].right = r;
    }
    return id;
  };
  link();
  if (next != tree.nodes.size()) throw DataError(path + ": trailing tree nodes");
  return tree;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

void TreeConfig::validate() const {
  if (max_depth && *max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (features_per_split < 0) throw ConfigError("features_per_split must be >= 0");
}

double Tree::predict(std::span<const double> x) const {
  std::size_t k = 0;
  while (!nodes[k].is_leaf()) {
    const TreeNode& n = nodes[k];
    k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[k].value;
}

int Tree::depth() const {
  std::function<int(std::size_t)> walk = [&](std::size_t k) -> int {
    const TreeNode& n = nodes[k];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(static_cast<std::size_t>(n.left)), walk(static_cast<std::size_t>(n.right)));
  };
  return nodes.empty() ? 0 : walk(0);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree fit_decision_tree(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg) {
  check_inputs(X, y, cfg);
  const std::vector<double> weight(y.size(), 1.0);
  Rng rng(cfg.seed);
  return fit_classifier(X, y, weight, cfg, cfg.features_per_split, &rng);
}

double Forest::predict_proba(std::span<const double> x) const {
  double s = 0.0;
  for (const Tree& t : trees) s += t.predict(x);
  return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
}

Forest fit_random_forest(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg) {
  check_inputs(X, y, cfg);
  const int fps = cfg.features_per_split > 0
                      ? cfg.features_per_split
                      : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
  Rng rng(cfg.seed);
  Forest forest;
  const std::size_t n = y.size();
  std::vector<double> weight(n);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    if (cfg.bootstrap) {
      std::fill(weight.begin(), weight.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) weight[rng.uniform_index(n)] += 1.0;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    forest.trees.push_back(fit_classifier(X, y, weight, cfg, fps, &rng));
  }
  return forest;
}

double BoostedTrees::raw_score(std::span<const double> x) const {
  double f = init_score;
  for (const Tree& t : trees) f += learning_rate * t.predict(x);
  return f;
}

double log_loss(std::span<const double> p, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i], 1e-15, 1.0 - 1e-15);
    s -= y[i] == 1 ? std::log(q) : std::log1p(-q);
  }
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

BoostedTrees fit_gradient_boosted(const DenseMatrix& X, std::span<const int> y, const TreeConfig& cfg,
                                  std::vector<double>* loss_trace) {
  check_inputs(X, y, cfg);
  const std::size_t n = y.size();
  BoostedTrees model;
  model.learning_rate = cfg.learning_rate;
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double prior = std::clamp(n > 0 ? pos / static_cast<double>(n) : 0.5, 1e-15, 1.0 - 1e-15);
  model.init_score = std::log(prior / (1.0 - prior));

  std::vector<double> F(n, model.init_score), p(n), residual(n);
  const std::vector<double> weight(n, 1.0);
  auto refresh = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = sigmoid(F[i]);
      residual[i] = static_cast<double>(y[i]) - p[i];
    }
  };
  refresh();
  if (loss_trace != nullptr) loss_trace->push_back(log_loss(p, y));
  Rng rng(cfg.seed);
  // One Newton step per leaf.
  auto newton = [&](std::span<const std::uint32_t> idx) {
    double num = 0.0, den = 0.0;
    for (std::uint32_t i : idx) {
      num += residual[i];
      den += p[i] * (1.0 - p[i]);
    }
    return std::abs(den) < 1e-150 ? 0.0 : num / den;
  };
  for (int m = 0; m < cfg.n_estimators; ++m) {
    TreeBuilder builder(X, residual, weight, Criterion::squared_error, cfg, cfg.features_per_split, &rng, newton);
    Tree tree = builder.build();
    for (std::size_t i = 0; i < n; ++i) {
      F[i] += cfg.learning_rate * tree.predict(std::span<const double>(X.row(static_cast<Eigen::Index>(i)).data(),
                                                                        static_cast<std::size_t>(X.cols())));
      if (!std::isfinite(F[i]))
        throw NumericError("gradient boosting: non-finite score at stage " + std::to_string(m) + ", row " +
                           std::to_string(i));
    }
    model.trees.push_back(std::move(tree));
    refresh();
    if (loss_trace != nullptr) loss_trace->push_back(log_loss(p, y));
  }
  return model;
}

std::vector<int> predict_labels(const Tree& tree, const DenseMatrix& X) {
  return threshold_labels([&](std::span<const double> x) { return tree.predict(x); }, X);
}

std::vector<int> predict_labels(const Forest& forest, const DenseMatrix& X) {
  return threshold_labels([&](std::span<const double> x) { return forest.predict_proba(x); }, X);
}

std::vector<int> predict_labels(const BoostedTrees& model, const DenseMatrix& X) {
  return threshold_labels([&](std::span<const double> x) { return model.predict_proba(x); }, X);
}

void save_trees(const TreeEnsemble& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::put_header(out, kMagic, kVersion);
  bin::put(out, static_cast<std::uint32_t>(model.kind));
  bin::put(out, model.init_score);
  bin::put(out, model.learning_rate);
  bin::put<std::uint64_t>(out, model.trees.size());
  for (const Tree& t : model.trees) write_tree(out, t);
  if (!out) throw DataError("write failed: " + path);
}

TreeEnsemble load_trees(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::get_header(in, kMagic, kVersion, path);
  TreeEnsemble m;
  const auto kind = bin::get<std::uint32_t>(in, path);
  if (kind > 2) throw DataError(path + ": unknown tree model kind");
  m.kind = static_cast<TreeEnsembleKind>(kind);
  m.init_score = bin::get<double>(in, path);
  m.learning_rate = bin::get<double>(in, path);
  const auto count = bin::get<std::uint64_t>(in, path);
  if (count > 1'000'000) throw DataError(path + ": bad tree count");
  for (std::uint64_t k = 0; k < count; ++k) m.trees.push_back(read_tree(in, path));
  return m;
}

DenseMatrix select_columns(const DenseMatrix& X, const std::vector<int>& columns) {
  DenseMatrix out(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= X.cols()) throw std::out_of_range("select_columns: bad column");
    out.col(static_cast<Eigen::Index>(c)) = X.col(columns[c]);
  }
  return out;
}

AblationConfigs AblationConfigs::defaults(std::uint64_t seed) {
  AblationConfigs c;
  c.tree.max_depth = 10;
  c.tree.min_samples_leaf = 5;
  c.tree.seed = seed;
  c.forest.max_depth = std::nullopt;
  c.forest.min_samples_leaf = 5;
  c.forest.n_estimators = 50;
  c.forest.seed = seed;
  c.boosted.max_depth = 4;
  c.boosted.n_estimators = 500;
  c.boosted.learning_rate = 0.1;
  c.boosted.seed = seed;
  return c;
}

std::vector<AblationRow> feature_ablation(const std::vector<FeatureGroup>& groups, const DenseMatrix& X_train,
                                          std::span<const int> y_train, const DenseMatrix& X_valid,
                                          std::span<const int> y_valid, const AblationConfigs& configs) {
  std::vector<AblationRow> rows;
  // Empty prefix: majority class of the training labels.
  {
    const auto pos = std::count(y_train.begin(), y_train.end(), 1);
    const int majority = 2 * pos > static_cast<std::ptrdiff_t>(y_train.size()) ? 1 : 0;
    const std::vector<int> pred(y_valid.size(), majority);
    const Metrics m = score(pred, y_valid);
    rows.push_back(AblationRow{"majority class", 0, m.accuracy, kNaN, m.degenerate ? kNaN : m.f_score, kNaN});
  }
  std::vector<int> columns;
  std::string label;
  for (FeatureGroup g : groups) {
    const auto [first, count] = group_columns(g);
    for (std::size_t c = first; c < first + count; ++c) columns.push_back(static_cast<int>(c));
    label += (label.empty() ? "" : ", ") + std::string(to_string(g));
    const DenseMatrix Xt = select_columns(X_train, columns), Xv = select_columns(X_valid, columns);
    const Metrics a = score(predict_labels(fit_decision_tree(Xt, y_train, configs.tree), Xv), y_valid);
    const Metrics b = score(predict_labels(fit_random_forest(Xt, y_train, configs.forest), Xv), y_valid);
    const Metrics c = score(predict_labels(fit_gradient_boosted(Xt, y_train, configs.boosted), Xv), y_valid);
    AblationRow row;
    row.features = label;
    row.num_features = static_cast<int>(columns.size());
    row.accuracy = (a.accuracy + b.accuracy + c.accuracy) / 3.0;
    row.f_score = (a.f_score + b.f_score + c.f_score) / 3.0;
    const AblationRow& prev = rows.back();
    row.delta_accuracy = row.accuracy - prev.accuracy;
    row.delta_f_score = std::isnan(prev.f_score) ? kNaN : row.f_score - prev.f_score;
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "features,num_features,accuracy,delta_accuracy,f_score,delta_f_score\n";
  for (const auto& r : rows) {
    out << '"' << r.features << "\"," << r.num_features << ',' << fmt(r.accuracy) << ',' << fmt(r.delta_accuracy)
        << ',' << fmt(r.f_score) << ',' << fmt(r.delta_f_score) << '\n';
  }
}

}  // namespace dupq
