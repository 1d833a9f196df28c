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

#include "dupq/run_config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dupq/common.hpp"

namespace dupq {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      // data
      {"data", "", "question-pair CSV for stats and split"},
      {"train", "", "training split CSV"},
      {"valid", "", "validation split CSV"},
      {"test", "", "test split CSV"},
      {"eval_data", "", "CSV to evaluate (eval, errors); defaults to test"},
      {"split_name", "", "label for the evaluated split in reports"},
      {"strict", "false", "abort on malformed CSV rows instead of skipping them"},
      {"out", "", "output directory or file"},
      {"model_dir", "", "model directory (train writes, eval and errors read)"},
      {"report", "", "CSV report path"},
      // split
      {"split", "blind", "split kind: blind or disjoint"},
      {"ratio_train", "0.7", "train fraction"},
      {"ratio_valid", "0.2", "validation fraction"},
      {"ratio_test", "0.1", "test fraction"},
      {"identity", "text", "question identity for stats: text or qid"},
      {"seed", "0", "random seed"},
      // features
      {"model", "lr", "majority, lr, svm_linear, svm_rbf, dtree, rforest, gbt, cbow, lstm, lstm_attn, bilstm, bilstm_attn"},
      {"features", "", "unigram, bigram, trigram, hand, embed_concat, embed_dist, tokens (default depends on model)"},
      {"pipeline", "", "preprocessing steps, comma separated (default depends on features)"},
      {"min_count", "1", "minimum training count for an n-gram column"},
      {"embeddings", "", "word-vector text file"},
      {"embedding_dim", "50", "word-vector dimension"},
      // linear
      {"alpha", "0.00001", "SGD L2 weight"},
      {"n_iter", "20", "SGD passes"},
      {"t0", "0", "SGD schedule offset (0: 10 / alpha)"},
      // kernel svm
      {"C", "1.0", "SVM penalty"},
      {"kernel", "rbf", "kernel for svm_rbf: rbf or linear"},
      {"gamma", "0", "RBF coefficient (0: 1 / feature count)"},
      {"max_iter", "0", "SMO iteration limit (0: none)"},
      {"tolerance", "0.001", "SMO stopping tolerance"},
      {"row_cap", "50000", "kernel SVM training row cap"},
      {"cache_mb", "256", "kernel row cache size"},
      // trees
      {"max_depth", "", "tree depth limit (empty or none: unbounded; default depends on model)"},
      {"min_samples_leaf", "", "minimum leaf weight (default depends on model)"},
      {"n_estimators", "", "trees or boosting stages (default depends on model)"},
      {"tree_learning_rate", "0.1", "boosting shrinkage"},
      {"features_per_split", "0", "features examined per split (0: model default)"},
      {"bootstrap", "true", "forest bootstrap sampling"},
      // neural
      {"hidden_dim", "300", "hidden state size"},
      {"dropout", "0.1", "dropout rate"},
      {"l2_beta", "0.01", "L2 weight (not applied to cbow)"},
      {"learning_rate", "0.001", "Adam step size"},
      {"epochs", "10", "training epochs"},
      {"batch_size", "128", "mini-batch size"},
      {"oov_sigma", "0.1", "std. dev. of initial vectors for words without a pretrained vector"},
      {"max_train", "0", "use only the first N training pairs (0: all)"},
      // sweeps and analysis
      {"sweep", "", "preproc, alpha, iters, svm_c or ablation"},
      {"grid", "", "comma-separated sweep values (default depends on sweep)"},
      {"repeats", "3", "repeats per setting (preproc sweep)"},
      {"groups", "L,LC,LCXS,LW,CAP,PRE,M", "hand-feature group order for ablation"},
      {"n", "20", "number of pairs for errors"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (const auto hash = body.find(" #"); hash != std::string::npos) body = trim(body.substr(0, hash));
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    try {
      cfg.set(key, trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  try {
    return parse(read_file(path), path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::merge_file(const std::string& path) {
  const RunConfig other = load(path);
  for (const auto& [k, is] : other.explicit_) {
    if (is) set(k, other.values_.at(k));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!has(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
  explicit_[key] = true;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

bool RunConfig::is_set(const std::string& key) const {
  const auto it = explicit_.find(key);
  return it != explicit_.end() && it->second;
}

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::num(const std::string& key) const {
  const std::string& v = str(key);
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const std::string& v = str(key);
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& v = str(key);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::optional<std::int64_t> RunConfig::optional_integer(const std::string& key) const {
  const std::string& v = str(key);
  if (v.empty() || v == "none") return std::nullopt;
  return integer(key);
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string& v = str(key);
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> RunConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    double x = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || p != item.data() + item.size())
      throw ConfigError("config key '" + key + "' expects numbers, got '" + item + "'");
    out.push_back(x);
  }
  return out;
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

}  // namespace dupq
