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

#include "dupq/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "dupq/hand_features.hpp"
#include "dupq/kernel_svm.hpp"
#include "dupq/linear_models.hpp"
#include "dupq/neural_models.hpp"
#include "dupq/ngram_features.hpp"
#include "json.hpp"

namespace dupq {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.bin";
constexpr const char* kFeatureFile = "features.space";
constexpr const char* kConfigFile = "run.conf";
constexpr const char* kMetricsFile = "metrics.jsonl";

const std::vector<std::pair<ModelKind, const char*>>& model_names() {
  static const std::vector<std::pair<ModelKind, const char*>> names = {
      {ModelKind::majority, "majority"}, {ModelKind::lr, "lr"},
      {ModelKind::svm_linear, "svm_linear"}, {ModelKind::svm_rbf, "svm_rbf"},
      {ModelKind::dtree, "dtree"}, {ModelKind::rforest, "rforest"},
      {ModelKind::gbt, "gbt"}, {ModelKind::cbow, "cbow"},
      {ModelKind::lstm, "lstm"}, {ModelKind::lstm_attn, "lstm_attn"},
      {ModelKind::bilstm, "bilstm"}, {ModelKind::bilstm_attn, "bilstm_attn"}};
  return names;
}

const std::vector<std::pair<FeatureKind, const char*>>& feature_names() {
  static const std::vector<std::pair<FeatureKind, const char*>> names = {
      {FeatureKind::unigram, "unigram"}, {FeatureKind::bigram, "bigram"},
      {FeatureKind::trigram, "trigram"}, {FeatureKind::hand, "hand"},
      {FeatureKind::embed_concat, "embed_concat"}, {FeatureKind::embed_dist, "embed_dist"},
      {FeatureKind::tokens, "tokens"}};
  return names;
}

bool is_neural(ModelKind k) { return model_capabilities(k) == kSequence; }
bool is_tree(ModelKind k) { return k == ModelKind::dtree || k == ModelKind::rforest || k == ModelKind::gbt; }
bool is_ngram(FeatureKind k) { return feature_capability(k) == kSparse; }
bool uses_embeddings(FeatureKind k) { return k == FeatureKind::embed_concat || k == FeatureKind::embed_dist; }

int ngram_order(FeatureKind k) {
  switch (k) {
    case FeatureKind::unigram: return 1;
    case FeatureKind::bigram: return 2;
    case FeatureKind::trigram: return 3;
    default: throw ConfigError("feature kind " + to_string(k) + " is not an n-gram kind");
  }
}

NeuralKind neural_kind(ModelKind k) {
  switch (k) {
    case ModelKind::cbow: return NeuralKind::cbow;
    case ModelKind::lstm: return NeuralKind::lstm;
    case ModelKind::lstm_attn: return NeuralKind::lstm_attn;
    case ModelKind::bilstm: return NeuralKind::bilstm;
    case ModelKind::bilstm_attn: return NeuralKind::bilstm_attn;
    default: throw ConfigError(to_string(k) + " is not a neural model");
  }
}

std::string key_value_file(const std::vector<std::pair<std::string, std::string>>& items) {
  std::string out;
  for (const auto& [k, v] : items) out += k + " " + v + "\n";
  return out;
}

std::string manifest_value(const std::string& text, const std::string& key, const std::string& path) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
    if (line == key) return "";
  }
  throw DataError(path + ": missing '" + key + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::pair<TokenSequence, TokenSequence>> tokenize_pairs(const Dataset& d, const text::Pipeline& p) {
  std::vector<std::pair<TokenSequence, TokenSequence>> out;
  out.reserve(d.size());
  for (const auto& q : d) out.emplace_back(text::preprocess_tokens(p, q.question1), text::preprocess_tokens(p, q.question2));
  return out;
}

std::unordered_set<std::string> token_set(const Dataset& d, const text::Pipeline& p) {
  std::unordered_set<std::string> s;
  for (const auto& [a, b] : tokenize_pairs(d, p)) {
    s.insert(a.begin(), a.end());
    s.insert(b.begin(), b.end());
  }
  return s;
}

std::shared_ptr<EmbeddingTable> load_table(const RunConfig& cfg, Warnings* warnings,
                                           const std::unordered_set<std::string>* keep) {
  const std::string& path = cfg.str("embeddings");
  if (path.empty()) throw ConfigError("these features need word vectors: set 'embeddings' to a vector file");
  return std::make_shared<EmbeddingTable>(
      load_embeddings(path, static_cast<std::size_t>(cfg.integer("embedding_dim")), warnings, keep));
}

DenseMatrix dense_features(const Dataset& d, FeatureKind kind, const EmbeddingTable* table,
                           const text::Pipeline& pipeline) {
  if (kind == FeatureKind::hand) return hand_feature_matrix(d);
  return embedding_features(d, kind, *table, pipeline);
}

// ---------------------------------------------------------------------------
// Classifiers

class MajorityClassifier : public PairClassifier {
 public:
  explicit MajorityClassifier(double positive_fraction) : p_(positive_fraction) {}
  std::vector<double> scores(const Dataset& d) const override { return std::vector<double>(d.size(), p_); }
  double threshold() const override { return 0.5; }

 private:
  double p_;
};

class LinearClassifier : public PairClassifier {
 public:
  LinearClassifier(LinearModel m, FeatureSpace s) : model_(std::move(m)), space_(std::move(s)) {}
  std::vector<double> scores(const Dataset& d) const override {
    const SparseMatrix X = space_.vectorize(d);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = dupq::predict(model_, X.row(i)).score;
    return out;
  }
  double threshold() const override { return 0.0; }

 private:
  LinearModel model_;
  FeatureSpace space_;
};

class DenseClassifier : public PairClassifier {
 public:
  DenseClassifier(FeatureKind kind, std::shared_ptr<EmbeddingTable> table, text::Pipeline pipeline)
      : kind_(kind), table_(std::move(table)), pipeline_(std::move(pipeline)) {}
  std::vector<double> scores(const Dataset& d) const override {
    const DenseMatrix X = dense_features(d, kind_, table_.get(), pipeline_);
    std::vector<double> out(static_cast<std::size_t>(X.rows()));
    const auto dim = static_cast<std::size_t>(X.cols());
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      out[static_cast<std::size_t>(r)] = score_row(std::span<const double>(X.row(r).data(), dim));
    return out;
  }

 protected:
  virtual double score_row(std::span<const double> x) const = 0;

 private:
  FeatureKind kind_;
  std::shared_ptr<EmbeddingTable> table_;
  text::Pipeline pipeline_;
};

class KernelClassifier : public DenseClassifier {
 public:
  KernelClassifier(KernelSVMModel m, FeatureKind kind, std::shared_ptr<EmbeddingTable> table, text::Pipeline p)
      : DenseClassifier(kind, std::move(table), std::move(p)), model_(std::move(m)) {}
  double threshold() const override { return 0.0; }

 protected:
  double score_row(std::span<const double> x) const override { return decision_value(model_, x); }

 private:
  KernelSVMModel model_;
};

class TreeClassifier : public DenseClassifier {
 public:
  TreeClassifier(TreeEnsemble m, FeatureKind kind, std::shared_ptr<EmbeddingTable> table, text::Pipeline p)
      : DenseClassifier(kind, std::move(table), std::move(p)), model_(std::move(m)) {
    for (const Tree& t : model_.trees) {
      forest_.trees.push_back(t);
    }
    boosted_.init_score = model_.init_score;
    boosted_.learning_rate = model_.learning_rate;
    boosted_.trees = model_.trees;
  }
  double threshold() const override { return 0.5; }

 protected:
  double score_row(std::span<const double> x) const override {
    switch (model_.kind) {
      case TreeEnsembleKind::tree: return model_.trees.at(0).predict(x);
      case TreeEnsembleKind::forest: return forest_.predict_proba(x);
      case TreeEnsembleKind::boosted: return boosted_.predict_proba(x);
    }
    return 0.0;
  }

 private:
  TreeEnsemble model_;
  Forest forest_;
  BoostedTrees boosted_;
};

class NeuralClassifier : public PairClassifier {
 public:
  NeuralClassifier(NeuralPairModel m, text::Pipeline p) : model_(std::move(m)), pipeline_(std::move(p)) {}
  std::vector<double> scores(const Dataset& d) const override {
    std::vector<double> out;
    out.reserve(d.size());
    for (const auto& [a, b] : tokenize_pairs(d, pipeline_)) out.push_back(model_.predict_proba(model_.to_ids(a, b))(1));
    return out;
  }
  double threshold() const override { return 0.5; }

 private:
  NeuralPairModel model_;
  text::Pipeline pipeline_;
};

TreeConfig tree_config(const RunConfig& cfg, ModelKind kind) {
  TreeConfig t;
  t.seed = cfg.u64("seed");
  t.learning_rate = cfg.num("tree_learning_rate");
  t.features_per_split = static_cast<int>(cfg.integer("features_per_split"));
  t.bootstrap = cfg.flag("bootstrap");
  switch (kind) {
    case ModelKind::dtree: t.max_depth = 10; t.min_samples_leaf = 5; t.n_estimators = 1; break;
    case ModelKind::rforest: t.max_depth = std::nullopt; t.min_samples_leaf = 5; t.n_estimators = 50; break;
    case ModelKind::gbt: t.max_depth = 4; t.min_samples_leaf = 1; t.n_estimators = 500; break;
    default: throw ConfigError(to_string(kind) + " is not a tree model");
  }
  const std::string& depth = cfg.str("max_depth");
  if (depth == "none") t.max_depth = std::nullopt;
  else if (!depth.empty()) t.max_depth = static_cast<int>(cfg.integer("max_depth"));
  if (!cfg.str("min_samples_leaf").empty()) t.min_samples_leaf = static_cast<int>(cfg.integer("min_samples_leaf"));
  if (!cfg.str("n_estimators").empty()) t.n_estimators = static_cast<int>(cfg.integer("n_estimators"));
  t.validate();
  return t;
}

KernelSVMConfig kernel_config(const RunConfig& cfg) {
  KernelSVMConfig k;
  k.C = cfg.num("C");
  k.kernel = parse_kernel(cfg.str("kernel"));
  k.gamma = cfg.num("gamma");
  k.max_iter = cfg.integer("max_iter");
  k.tolerance = cfg.num("tolerance");
  k.seed = cfg.u64("seed");
  k.row_cap = static_cast<std::size_t>(cfg.u64("row_cap"));
  k.cache_mb = static_cast<std::size_t>(cfg.u64("cache_mb"));
  k.validate();
  return k;
}

NeuralConfig neural_config(const RunConfig& cfg, ModelKind kind) {
  NeuralConfig n;
  n.kind = neural_kind(kind);
  n.hidden_dim = static_cast<int>(cfg.integer("hidden_dim"));
  n.dropout = cfg.num("dropout");
  n.l2_beta = cfg.num("l2_beta");
  n.learning_rate = cfg.num("learning_rate");
  n.epochs = static_cast<int>(cfg.integer("epochs"));
  n.batch_size = static_cast<int>(cfg.integer("batch_size"));
  n.oov_sigma = cfg.num("oov_sigma");
  n.seed = cfg.u64("seed");
  n.validate();
  return n;
}

SGDConfig sgd_config(const RunConfig& cfg, Loss loss) {
  SGDConfig s;
  s.loss = loss;
  s.alpha = cfg.num("alpha");
  s.n_iter = static_cast<int>(cfg.integer("n_iter"));
  s.t0 = cfg.num("t0");
  s.seed = cfg.u64("seed");
  s.validate();
  return s;
}

NGramConfig ngram_config(const RunConfig& cfg, FeatureKind kind) {
  NGramConfig n;
  n.max_n = ngram_order(kind);
  n.pipeline = resolve_pipeline(cfg, kind);
  n.min_count = cfg.u64("min_count");
  n.validate();
  return n;
}

std::string dense_manifest(FeatureKind kind, std::size_t dim, const EmbeddingTable* table) {
  return "dupq-dense-features 1\n" +
         key_value_file({{"kind", to_string(kind)},
                         {"dim", std::to_string(dim)},
                         {"embeddings_hash", table != nullptr ? hex64(table->source_hash()) : "none"}});
}

void check_dense_manifest(const std::string& path, FeatureKind kind, std::size_t model_dim,
                          const EmbeddingTable* table) {
  const std::string text = read_file(path);
  if (manifest_value(text, "kind", path) != to_string(kind))
    throw DataError(path + ": feature kind does not match run.conf");
  if (model_dim != 0 && manifest_value(text, "dim", path) != std::to_string(model_dim))
    throw DataError(path + ": feature dimension does not match the model");
  if (table != nullptr && manifest_value(text, "embeddings_hash", path) != hex64(table->source_hash()))
    throw DataError("feature-space hash mismatch: " + path + " was built from a different word-vector file");
}

}  // namespace

// ---------------------------------------------------------------------------
// Kinds

std::string to_string(ModelKind kind) {
  for (const auto& [k, n] : model_names()) {
    if (k == kind) return n;
  }
  return "?";
}

std::string to_string(FeatureKind kind) {
  for (const auto& [k, n] : feature_names()) {
    if (k == kind) return n;
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (const auto& [k, n] : model_names()) {
    if (name == n) return k;
  }
  throw ConfigError("unknown model '" + name + "'");
}

FeatureKind parse_feature_kind(const std::string& name) {
  for (const auto& [k, n] : feature_names()) {
    if (name == n) return k;
  }
  throw ConfigError("unknown feature kind '" + name + "'");
}

unsigned model_capabilities(ModelKind kind) {
  switch (kind) {
    case ModelKind::majority: return kSparse | kDense | kSequence;
    case ModelKind::lr:
    case ModelKind::svm_linear: return kSparse;
    case ModelKind::svm_rbf:
    case ModelKind::dtree:
    case ModelKind::rforest:
    case ModelKind::gbt: return kDense;
    default: return kSequence;
  }
}

Capability feature_capability(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::unigram:
    case FeatureKind::bigram:
    case FeatureKind::trigram: return kSparse;
    case FeatureKind::tokens: return kSequence;
    default: return kDense;
  }
}

FeatureKind default_features(ModelKind kind) {
  switch (kind) {
    case ModelKind::lr:
    case ModelKind::svm_linear: return FeatureKind::trigram;
    case ModelKind::svm_rbf: return FeatureKind::embed_concat;
    case ModelKind::majority:
    case ModelKind::dtree:
    case ModelKind::rforest:
    case ModelKind::gbt: return FeatureKind::hand;
    default: return FeatureKind::tokens;
  }
}

void check_compatible(ModelKind model, FeatureKind features) {
  if ((model_capabilities(model) & feature_capability(features)) != 0) return;
  std::string why;
  if (is_tree(model) && is_ngram(features)) {
    why = "tree models need a small dense feature set; with millions of sparse n-gram columns, exhaustive "
          "split search is computationally intractable. Use features = hand, embed_concat or embed_dist";
  } else if (model == ModelKind::svm_rbf && is_ngram(features)) {
    why = "the kernel SVM solves the dual over dense rows and is limited to low-dimensional features; "
          "use svm_linear for n-grams";
  } else if (is_neural(model)) {
    why = "neural models read token sequences; use features = tokens";
  } else if (features == FeatureKind::tokens) {
    why = "token sequences are only consumed by the neural models";
  } else {
    why = "linear SGD models take sparse n-gram features; use svm_rbf (kernel = linear or rbf) for dense features";
  }
  throw ConfigError("model " + to_string(model) + " cannot use features " + to_string(features) + ": " + why);
}

text::Pipeline resolve_pipeline(const RunConfig& cfg, FeatureKind kind) {
  if (cfg.is_set("pipeline") || !cfg.str("pipeline").empty()) return text::Pipeline::parse(cfg.str("pipeline"));
  if (is_ngram(kind)) return text::Pipeline{{text::Step::remove_non_ascii}};
  return text::Pipeline{};
}

DenseMatrix hand_feature_matrix(const Dataset& d) {
  DenseMatrix X(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(kNumHandFeatures));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const HandFeatureVector f = extract_all(d[i]);
    for (std::size_t c = 0; c < kNumHandFeatures; ++c)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = f[c];
  }
  return X;
}

DenseMatrix embedding_features(const Dataset& d, FeatureKind kind, const EmbeddingTable& table,
                               const text::Pipeline& pipeline) {
  if (!uses_embeddings(kind)) throw ConfigError(to_string(kind) + " is not an embedding feature kind");
  const auto dim = static_cast<Eigen::Index>(kind == FeatureKind::embed_concat ? 2 * table.dim() : 7);
  DenseMatrix X(static_cast<Eigen::Index>(d.size()), dim);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const SentenceEmbedding u = embed_sentence(text::preprocess_tokens(pipeline, d[i].question1), table);
    const SentenceEmbedding v = embed_sentence(text::preprocess_tokens(pipeline, d[i].question2), table);
    const auto r = static_cast<Eigen::Index>(i);
    if (kind == FeatureKind::embed_concat) {
      const std::vector<double> c = pair_concat(u, v);
      for (Eigen::Index k = 0; k < dim; ++k) X(r, k) = c[static_cast<std::size_t>(k)];
    } else {
      const auto a = distance_features(u, v).as_array();
      for (Eigen::Index k = 0; k < 7; ++k) X(r, k) = a[static_cast<std::size_t>(k)];
    }
  }
  return X;
}

std::vector<int> PairClassifier::predict(const Dataset& d) const {
  const std::vector<double> s = scores(d);
  const double t = threshold();
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > t ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Training and loading

std::unique_ptr<PairClassifier> train_model(const RunConfig& cfg_in, const Dataset& train_in, const Dataset& valid,
                                            const std::string& model_dir, Warnings* warnings, std::ostream* log) {
  RunConfig cfg = cfg_in;
  const ModelKind mk = parse_model_kind(cfg.str("model"));
  const FeatureKind fk = cfg.str("features").empty() ? default_features(mk) : parse_feature_kind(cfg.str("features"));
  check_compatible(mk, fk);
  const text::Pipeline pipeline = resolve_pipeline(cfg, fk);
  cfg.set("features", to_string(fk));
  cfg.set("pipeline", pipeline.steps.empty() ? "none" : pipeline.to_string());
  if (model_dir.empty()) throw ConfigError("train needs model_dir");
  if (train_in.empty()) throw DataError("training set is empty");

  Dataset train_subset;
  const Dataset* train_ptr = &train_in;
  if (const auto cap = cfg.u64("max_train"); cap > 0 && cap < train_in.size()) {
    train_subset.assign(train_in.begin(), train_in.begin() + static_cast<std::ptrdiff_t>(cap));
    train_ptr = &train_subset;
  }
  const Dataset& train = *train_ptr;
  const std::vector<int> y = labels_of(train);

  const fs::path dir(model_dir);
  fs::create_directories(dir);
  write_text(dir / kConfigFile, cfg.dump());
  std::ofstream metrics(dir / kMetricsFile);
  if (!metrics) throw DataError("cannot write " + (dir / kMetricsFile).string());
  auto say = [&](const std::string& msg) {
    if (log != nullptr) *log << "[train] " << msg << "\n" << std::flush;
  };
  say("model " + to_string(mk) + ", features " + to_string(fk) + ", " + std::to_string(train.size()) +
      " training pairs");

  std::unique_ptr<PairClassifier> clf;
  if (mk == ModelKind::majority) {
    const double p = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
    std::ostringstream s;
    s << std::setprecision(17) << "dupq-majority 1\npositive_fraction " << p << "\n";
    write_text(dir / kModelFile, s.str());
    write_text(dir / kFeatureFile, "dupq-majority-features 1\n");
    clf = std::make_unique<MajorityClassifier>(p);
  } else if (mk == ModelKind::lr || mk == ModelKind::svm_linear) {
    FeatureSpace space = FeatureSpace::fit(train, ngram_config(cfg, fk));
    say("feature space: " + std::to_string(space.size()) + " columns");
    const SparseMatrix X = space.vectorize(train);
    SGDConfig sgd = sgd_config(cfg, mk == ModelKind::lr ? Loss::logistic : Loss::hinge);
    if (mk == ModelKind::svm_linear && cfg.is_set("C")) sgd.alpha = 1.0 / (static_cast<double>(train.size()) * cfg.num("C"));
    LinearModel model = train_sgd(X, y, sgd);
    model.feature_space_hash = space.hash();
    save_linear_model(model, (dir / kModelFile).string());
    space.save((dir / kFeatureFile).string());
    clf = std::make_unique<LinearClassifier>(std::move(model), std::move(space));
  } else if (model_capabilities(mk) == kDense) {
    std::shared_ptr<EmbeddingTable> table;
    if (uses_embeddings(fk)) table = load_table(cfg, warnings, nullptr);
    const DenseMatrix X = dense_features(train, fk, table.get(), pipeline);
    write_text(dir / kFeatureFile, dense_manifest(fk, static_cast<std::size_t>(X.cols()), table.get()));
    if (mk == ModelKind::svm_rbf) {
      SMOReport report;
      KernelSVMModel model = train_kernel_svm(X, y, kernel_config(cfg), warnings, &report);
      say("SMO: " + std::to_string(report.iterations) + " iterations, " + std::to_string(model.dual_coef.size()) +
          " support vectors" + (report.converged ? "" : " (not converged)"));
      save_kernel_svm(model, (dir / kModelFile).string());
      clf = std::make_unique<KernelClassifier>(std::move(model), fk, table, pipeline);
    } else {
      const TreeConfig tc = tree_config(cfg, mk);
      TreeEnsemble ens;
      if (mk == ModelKind::dtree) {
        ens.kind = TreeEnsembleKind::tree;
        ens.trees.push_back(fit_decision_tree(X, y, tc));
      } else if (mk == ModelKind::rforest) {
        ens.kind = TreeEnsembleKind::forest;
        ens.trees = fit_random_forest(X, y, tc).trees;
      } else {
        std::vector<double> trace;
        BoostedTrees b = fit_gradient_boosted(X, y, tc, &trace);
        say("boosting log-loss " + std::to_string(trace.front()) + " -> " + std::to_string(trace.back()));
        ens.kind = TreeEnsembleKind::boosted;
        ens.init_score = b.init_score;
        ens.learning_rate = b.learning_rate;
        ens.trees = std::move(b.trees);
      }
      save_trees(ens, (dir / kModelFile).string());
      clf = std::make_unique<TreeClassifier>(std::move(ens), fk, table, pipeline);
    }
  } else {
    const NeuralConfig nc = neural_config(cfg, mk);
    const auto train_tokens = tokenize_pairs(train, pipeline);
    std::vector<TokenSequence> sentences;
    for (const auto& [a, b] : train_tokens) {
      sentences.push_back(a);
      sentences.push_back(b);
    }
    NeuralVocabulary vocab = NeuralVocabulary::build(sentences);
    const int dim = static_cast<int>(cfg.integer("embedding_dim"));
    NeuralPairModel model(nc, vocab, dim);
    if (!cfg.str("embeddings").empty()) {
      const std::unordered_set<std::string> keep(vocab.tokens().begin(), vocab.tokens().end());
      const auto table = load_table(cfg, warnings, &keep);
      const std::size_t found = model.load_pretrained(*table);
      say("pretrained vectors for " + std::to_string(found) + " of " + std::to_string(vocab.size() - 1) + " words");
    } else {
      warn(warnings, "no word-vector file configured; all embeddings start from Gaussian samples");
    }
    std::vector<PairIds> train_ids, valid_ids;
    for (std::size_t i = 0; i < train.size(); ++i)
      train_ids.push_back(model.to_ids(train_tokens[i].first, train_tokens[i].second, train[i].label));
    const auto valid_tokens = tokenize_pairs(valid, pipeline);
    for (std::size_t i = 0; i < valid.size(); ++i)
      valid_ids.push_back(model.to_ids(valid_tokens[i].first, valid_tokens[i].second, valid[i].label));
    const NeuralTrainResult result = train_neural(model, train_ids, valid_ids, &metrics);
    say("best epoch " + std::to_string(result.best_epoch));
    save_neural_model(model, (dir / kModelFile).string());
    write_text(dir / kFeatureFile, "dupq-token-features 1\n" +
                                       key_value_file({{"pipeline", pipeline.to_string()},
                                                       {"vocab_size", std::to_string(vocab.size())}}));
    clf = std::make_unique<NeuralClassifier>(std::move(model), pipeline);
  }

  const Metrics tm = score(clf->predict(train), y);
  nlohmann::json final_line = {{"final", true},
                               {"model", to_string(mk)},
                               {"features", to_string(fk)},
                               {"train_pairs", train.size()},
                               {"train_accuracy", tm.accuracy},
                               {"train_f_score", tm.f_score}};
  say("train accuracy " + std::to_string(tm.accuracy));
  if (!valid.empty()) {
    const Metrics vm = score(clf->predict(valid), labels_of(valid));
    final_line["valid_accuracy"] = vm.accuracy;
    final_line["valid_f_score"] = vm.f_score;
    say("valid accuracy " + std::to_string(vm.accuracy) + ", F-score " + std::to_string(vm.f_score));
  }
  metrics << final_line.dump() << "\n";
  return clf;
}

std::unique_ptr<PairClassifier> load_model(const std::string& model_dir, Warnings* warnings) {
  const fs::path dir(model_dir);
  const RunConfig cfg = RunConfig::load((dir / kConfigFile).string());
  const ModelKind mk = parse_model_kind(cfg.str("model"));
  const FeatureKind fk = parse_feature_kind(cfg.str("features"));
  check_compatible(mk, fk);
  const text::Pipeline pipeline = resolve_pipeline(cfg, fk);
  const std::string model_path = (dir / kModelFile).string();
  const std::string feature_path = (dir / kFeatureFile).string();

  if (mk == ModelKind::majority) {
    const std::string text = read_file(model_path);
    return std::make_unique<MajorityClassifier>(std::stod(manifest_value(text, "positive_fraction", model_path)));
  }
  if (mk == ModelKind::lr || mk == ModelKind::svm_linear) {
    LinearModel model = load_linear_model(model_path);
    FeatureSpace space = FeatureSpace::load(feature_path);
    if (space.hash() != model.feature_space_hash)
      throw DataError("feature-space hash mismatch: model expects " + hex64(model.feature_space_hash) + " but " +
                      feature_path + " hashes to " + hex64(space.hash()));
    if (space.size() != model.dim()) throw DataError("feature-space size does not match model dimension");
    return std::make_unique<LinearClassifier>(std::move(model), std::move(space));
  }
  if (model_capabilities(mk) == kDense) {
    std::shared_ptr<EmbeddingTable> table;
    if (uses_embeddings(fk)) table = load_table(cfg, warnings, nullptr);
    if (mk == ModelKind::svm_rbf) {
      KernelSVMModel model = load_kernel_svm(model_path);
      check_dense_manifest(feature_path, fk, model.dim(), table.get());
      return std::make_unique<KernelClassifier>(std::move(model), fk, table, pipeline);
    }
    TreeEnsemble ens = load_trees(model_path);
    check_dense_manifest(feature_path, fk, 0, table.get());
    return std::make_unique<TreeClassifier>(std::move(ens), fk, table, pipeline);
  }
  NeuralPairModel model = load_neural_model(model_path);
  const std::string text = read_file(feature_path);
  if (manifest_value(text, "vocab_size", feature_path) != std::to_string(model.vocabulary().size()))
    throw DataError("feature-space hash mismatch: vocabulary size in " + feature_path + " differs from the model");
  return std::make_unique<NeuralClassifier>(std::move(model), pipeline);
}

// ---------------------------------------------------------------------------
// Analysis

std::vector<ErrorCase> worst_errors(std::span<const double> scores, double threshold, std::span<const int> gold,
                                    std::size_t n) {
  if (scores.size() != gold.size()) throw std::invalid_argument("worst_errors: length mismatch");
  std::vector<ErrorCase> wrong;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] > threshold ? 1 : 0;
    if (pred != gold[i]) wrong.push_back(ErrorCase{i, gold[i], pred, scores[i], std::abs(scores[i] - threshold)});
  }
  std::stable_sort(wrong.begin(), wrong.end(),
                   [](const ErrorCase& a, const ErrorCase& b) { return a.confidence > b.confidence; });
  if (wrong.size() > n) wrong.resize(n);
  return wrong;
}

std::vector<PreprocRow> preproc_sweep(const std::vector<std::string>& pipelines, int max_n, const Dataset& train,
                                      const Dataset& valid, int repeats, std::uint64_t seed) {
  if (pipelines.empty()) throw ConfigError("preproc sweep needs at least one pipeline");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  std::vector<PreprocRow> rows;
  const std::vector<int> ytr = labels_of(train), yva = labels_of(valid);
  for (const std::string& spec : pipelines) {
    std::string steps = spec;
    std::replace(steps.begin(), steps.end(), '+', ',');
    NGramConfig nc;
    nc.max_n = max_n;
    nc.pipeline = text::Pipeline::parse(steps);
    PreprocRow row;
    row.pipeline = spec.empty() ? "none" : spec;
    row.vocabulary_size = token_set(train, nc.pipeline).size();
    const FeatureSpace space = FeatureSpace::fit(train, nc);
    const SparseMatrix Xtr = space.vectorize(train), Xva = space.vectorize(valid);
    for (int r = 0; r < repeats; ++r) {
      SGDConfig sgd;
      sgd.loss = Loss::hinge;
      sgd.n_iter = 50;
      sgd.alpha = 5e-5;
      sgd.seed = seed + static_cast<std::uint64_t>(r);
      const Metrics m = score(predict_labels(train_sgd(Xtr, ytr, sgd), Xva), yva);
      row.accuracy += m.accuracy / repeats;
      row.f_score += m.f_score / repeats;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_preproc_csv(std::ostream& out, const std::vector<PreprocRow>& rows) {
  out << "pipeline,vocabulary_size,accuracy,f_score\n";
  for (const auto& r : rows)
    out << r.pipeline << ',' << r.vocabulary_size << ',' << std::fixed << std::setprecision(4) << r.accuracy << ','
        << r.f_score << '\n';
}

void run_configured_sweep(const RunConfig& cfg, const Dataset& train, const Dataset& valid, std::ostream& out,
                          Warnings* warnings, std::ostream* log) {
  const std::string kind = cfg.str("sweep");
  auto features_or = [&](FeatureKind fallback) {
    return cfg.str("features").empty() ? fallback : parse_feature_kind(cfg.str("features"));
  };
  auto grid_or = [&](const std::vector<std::string>& fallback) {
    const auto g = cfg.list("grid");
    return g.empty() ? fallback : g;
  };
  auto say = [&](const std::string& msg) {
    if (log != nullptr) *log << "[sweep] " << msg << "\n" << std::flush;
  };
  const std::vector<int> ytr = labels_of(train), yva = labels_of(valid);
  if (train.empty() || valid.empty()) throw DataError("sweeps need non-empty train and valid sets");

  if (kind == "preproc") {
    const FeatureKind fk = features_or(FeatureKind::unigram);
    const auto grid = grid_or({"none", "replace_punc", "remove_punc", "remove_digits", "fix_non_ascii",
                               "remove_non_ascii", "lowercase", "replace_punc+remove_punc",
                               "fix_non_ascii+remove_non_ascii", "remove_punc+remove_digits"});
    say("preproc sweep over " + std::to_string(grid.size()) + " pipelines");
    write_preproc_csv(out, preproc_sweep(grid, ngram_order(fk), train, valid, static_cast<int>(cfg.integer("repeats")),
                                         cfg.u64("seed")));
    return;
  }
  if (kind == "ablation") {
    std::vector<FeatureGroup> groups;
    for (const auto& g : cfg.list("groups")) groups.push_back(parse_feature_group(g));
    say("ablation over " + std::to_string(groups.size()) + " feature groups");
    const auto rows = feature_ablation(groups, hand_feature_matrix(train), ytr, hand_feature_matrix(valid), yva,
                                       AblationConfigs::defaults(cfg.u64("seed")));
    write_ablation_csv(out, rows);
    return;
  }

  std::vector<std::string> grid;
  std::string header;
  FeatureKind fk;
  if (kind == "alpha") {
    fk = features_or(FeatureKind::trigram);
    grid = grid_or({"0.1", "0.01", "0.001", "0.0001", "0.00001", "0.000001"});
    header = "alpha";
  } else if (kind == "iters") {
    fk = features_or(FeatureKind::trigram);
    grid = grid_or({"5", "10", "15", "20", "25", "30", "35", "40", "45", "50"});
    header = "n_iter";
  } else if (kind == "svm_c") {
    fk = features_or(FeatureKind::unigram);
    grid = grid_or({"0.005", "0.01", "0.1", "0.5", "1.0", "10", "50"});
    header = "C";
  } else {
    throw ConfigError("unknown sweep '" + kind + "' (expected preproc, alpha, iters, svm_c or ablation)");
  }
  if (!is_ngram(fk)) throw ConfigError(kind + " sweep needs n-gram features");
  const FeatureSpace space = FeatureSpace::fit(train, ngram_config(cfg, fk));
  say(header + " sweep on " + to_string(fk) + " features (" + std::to_string(space.size()) + " columns)");
  const SparseMatrix Xtr = space.vectorize(train), Xva = space.vectorize(valid);
  std::vector<SGDConfig> configs;
  for (const auto& g : grid) {
    RunConfig c = cfg;
    SGDConfig s = sgd_config(c, kind == "svm_c" ? Loss::hinge : Loss::logistic);
    RunConfig probe;
    if (kind == "alpha") {
      probe.set("alpha", g);
      s.alpha = probe.num("alpha");
    } else if (kind == "iters") {
      probe.set("n_iter", g);
      s.n_iter = static_cast<int>(probe.integer("n_iter"));
    } else {
      probe.set("C", g);
      const double C = probe.num("C");
      if (!(C > 0)) throw ConfigError("C must be > 0");
      s.alpha = 1.0 / (static_cast<double>(train.size()) * C);
    }
    s.validate();
    configs.push_back(s);
  }
  auto rows = hyperparameter_sweep(configs, Xtr, ytr, Xva, yva);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].setting = grid[i];
    if (!rows[i].error.empty()) warn(warnings, header + "=" + grid[i] + ": " + rows[i].error);
  }
  write_sweep_csv(out, rows, header);
}

void print_stats(std::ostream& out, const DatasetStats& s) {
  auto pct = [&](std::uint64_t a) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << (s.n_pairs > 0 ? 100.0 * static_cast<double>(a) / static_cast<double>(s.n_pairs) : 0.0)
      << "%";
    return o.str();
  };
  out << "pairs:                       " << s.n_pairs << "\n"
      << "negative (not duplicate):    " << s.n_negative << " (" << pct(s.n_negative) << ")\n"
      << "positive (duplicate):        " << s.n_positive << " (" << pct(s.n_positive) << ")\n"
      << "unique questions:            " << s.n_unique_questions << "\n"
      << "questions occurring > once:  " << s.n_multi_occurrence_questions << "\n"
      << "max occurrences of one q.:   " << s.max_question_occurrence << "\n"
      << "questions with non-ASCII:    " << s.n_nonascii_questions << "\n"
      << "pairs with non-ASCII:        " << s.n_pairs_with_nonascii << "\n"
      << "pairs with an empty question: " << s.n_pairs_with_empty_question << "\n";
}

void write_histogram_csv(std::ostream& out, const DatasetStats& s) {
  out << "occurrences,questions\n";
  for (const auto& [occ, count] : s.occurrence_histogram) out << occ << ',' << count << '\n';
}

}  // namespace dupq
