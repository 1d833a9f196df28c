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
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dupq/pipeline.hpp"
#include "test_support.hpp"

namespace dupq {
namespace {

// ---------------------------------------------------------------------------
// Configuration

TEST(RunConfig, DefaultsAndOverrides) {
  RunConfig c = RunConfig::parse("model = gbt\n# comment\n\nalpha = 0.5  # trailing\n");
  EXPECT_EQ(c.str("model"), "gbt");
  EXPECT_EQ(c.num("alpha"), 0.5);
  EXPECT_EQ(c.integer("n_iter"), 20);
  EXPECT_TRUE(c.is_set("model"));
  EXPECT_FALSE(c.is_set("n_iter"));
  EXPECT_FALSE(c.optional_integer("max_depth").has_value());
  c.set("grid", "1, 2,3");
  EXPECT_EQ(c.num_list("grid"), (std::vector<double>{1, 2, 3}));
}

TEST(RunConfig, UnknownKeyAndBadLinesRejected) {
  EXPECT_THROW(RunConfig::parse("learning_rat = 0.1\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("just words\n"), ConfigError);
  EXPECT_THROW(RunConfig().set("nope", "1"), ConfigError);
  EXPECT_THROW(RunConfig::load(testing::data_path("bad.conf")), ConfigError);
}

TEST(RunConfig, BadNumbersRejected) {
  RunConfig c;
  c.set("alpha", "fast");
  EXPECT_THROW(c.num("alpha"), ConfigError);
  c.set("bootstrap", "maybe");
  EXPECT_THROW(c.flag("bootstrap"), ConfigError);
}

TEST(RunConfig, DumpParsesBackToSameValues) {
  RunConfig c;
  c.set("model", "cbow");
  c.set("epochs", "3");
  const RunConfig back = RunConfig::parse(c.dump());
  EXPECT_EQ(back.dump(), c.dump());
  EXPECT_EQ(back.str("model"), "cbow");
}

// ---------------------------------------------------------------------------
// Capabilities

TEST(Capabilities, TreesRejectNgrams) {
  for (ModelKind m : {ModelKind::dtree, ModelKind::rforest, ModelKind::gbt, ModelKind::svm_rbf}) {
    for (FeatureKind f : {FeatureKind::unigram, FeatureKind::bigram, FeatureKind::trigram})
      EXPECT_THROW(check_compatible(m, f), ConfigError) << to_string(m) << " " << to_string(f);
    EXPECT_NO_THROW(check_compatible(m, FeatureKind::hand));
  }
  EXPECT_THROW(check_compatible(ModelKind::lr, FeatureKind::hand), ConfigError);
  EXPECT_THROW(check_compatible(ModelKind::cbow, FeatureKind::trigram), ConfigError);
  EXPECT_NO_THROW(check_compatible(ModelKind::lstm, FeatureKind::tokens));
  for (ModelKind m : {ModelKind::majority, ModelKind::lr, ModelKind::svm_linear, ModelKind::svm_rbf,
                      ModelKind::dtree, ModelKind::rforest, ModelKind::gbt, ModelKind::cbow, ModelKind::lstm,
                      ModelKind::lstm_attn, ModelKind::bilstm, ModelKind::bilstm_attn}) {
    EXPECT_NO_THROW(check_compatible(m, default_features(m))) << to_string(m);
    EXPECT_EQ(parse_model_kind(to_string(m)), m);
  }
  EXPECT_THROW(parse_model_kind("xgboost"), ConfigError);
}

TEST(Capabilities, DefaultPipelineDependsOnFeatures) {
  RunConfig c;
  EXPECT_EQ(resolve_pipeline(c, FeatureKind::trigram).to_string(), "remove_non_ascii");
  EXPECT_TRUE(resolve_pipeline(c, FeatureKind::tokens).steps.empty());
  c.set("pipeline", "lowercase,remove_punc");
  EXPECT_EQ(resolve_pipeline(c, FeatureKind::unigram).to_string(), "lowercase,remove_punc");
}

// ---------------------------------------------------------------------------
// Train, save, load, evaluate

struct Splits {
  Dataset train, valid;
};

const Splits& splits() {
  static const Splits s = [] {
    Dataset all = testing::synthetic_pairs(500, 21);
    Splits out;
    out.train.assign(all.begin(), all.begin() + 360);
    out.valid.assign(all.begin() + 360, all.end());
    return out;
  }();
  return s;
}

// Word vectors for every token of the synthetic corpus, drawn at random.
std::string write_vectors(const testing::TempDir& tmp, int dim) {
  std::set<std::string> words;
  for (const auto* d : {&splits().train, &splits().valid}) {
    for (const auto& p : *d) {
      for (const auto& q : {p.question1, p.question2}) {
        for (const auto& t : text::tokenize(q)) words.insert(t);
      }
    }
  }
  Rng rng(5);
  const std::string path = tmp.file("vectors.txt");
  std::ofstream out(path);
  for (const auto& w : words) {
    out << w;
    for (int k = 0; k < dim; ++k) out << ' ' << rng.normal();
    out << '\n';
  }
  return path;
}

nlohmann::json final_line(const std::string& dir) {
  std::ifstream in(dir + "/metrics.jsonl");
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

struct Case {
  const char* name;
  std::vector<std::pair<const char*, const char*>> keys;
};

class RoundTrip : public ::testing::TestWithParam<Case> {};

TEST_P(RoundTrip, ReloadedModelReproducesLoggedValidation) {
  testing::TempDir tmp("pipe");
  RunConfig cfg;
  for (const auto& [k, v] : GetParam().keys) cfg.set(k, v);
  if (cfg.str("embeddings") == "@") cfg.set("embeddings", write_vectors(tmp, 8));
  cfg.set("embedding_dim", "8");
  const std::string dir = tmp.file("model");
  Warnings warnings;
  std::ostringstream log;
  const auto trained = train_model(cfg, splits().train, splits().valid, dir, &warnings, &log);
  const auto loaded = load_model(dir, &warnings);

  EXPECT_EQ(trained->scores(splits().valid), loaded->scores(splits().valid));
  const Metrics m = score(loaded->predict(splits().valid), labels_of(splits().valid));
  const nlohmann::json last = final_line(dir);
  EXPECT_TRUE(last.value("final", false));
  EXPECT_NEAR(m.accuracy, last.at("valid_accuracy").get<double>(), 0.1);
  EXPECT_EQ(last.at("model").get<std::string>(), cfg.str("model"));
  EXPECT_EQ(last.at("train_pairs").get<std::size_t>(), splits().train.size());
  // The reloaded config names the resolved feature kind.
  EXPECT_FALSE(RunConfig::load(dir + "/run.conf").str("features").empty());
}

INSTANTIATE_TEST_SUITE_P(
    Models, RoundTrip,
    ::testing::Values(Case{"majority", {{"model", "majority"}}},
                      Case{"lr_unigram", {{"model", "lr"}, {"features", "unigram"}}},
                      Case{"svm_linear_bigram", {{"model", "svm_linear"}, {"features", "bigram"}, {"C", "0.5"}}},
                      Case{"svm_rbf_hand", {{"model", "svm_rbf"}, {"features", "hand"}}},
                      Case{"dtree_hand", {{"model", "dtree"}}},
                      Case{"rforest_hand", {{"model", "rforest"}, {"n_estimators", "5"}}},
                      Case{"gbt_embed_dist",
                           {{"model", "gbt"}, {"features", "embed_dist"}, {"n_estimators", "20"}, {"embeddings", "@"}}},
                      Case{"lr_embed_concat", {{"model", "svm_rbf"}, {"features", "embed_concat"}, {"embeddings", "@"}}},
                      Case{"cbow", {{"model", "cbow"}, {"epochs", "2"}, {"hidden_dim", "8"}}},
                      Case{"bilstm_attn", {{"model", "bilstm_attn"}, {"epochs", "1"}, {"hidden_dim", "4"}}}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(LoadModel, TamperedFeatureSpaceIsDetected) {
  testing::TempDir tmp("tamper");
  RunConfig cfg;
  cfg.set("model", "lr");
  const std::string dir = tmp.file("m");
  train_model(cfg, splits().train, splits().valid, dir, nullptr, nullptr);
  std::string text;
  {
    std::ifstream in(dir + "/features.space");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text.insert(text.size() - 1, "x");  // rename the last n-gram
  std::ofstream(dir + "/features.space") << text;
  try {
    load_model(dir, nullptr);
    FAIL() << "expected a hash mismatch";
  } catch (const DataError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("feature-space hash mismatch", 0), 0u) << e.what();
  }
}

TEST(LoadModel, DifferentWordVectorsAreDetected) {
  testing::TempDir tmp("vec");
  RunConfig cfg;
  cfg.set("model", "dtree");
  cfg.set("features", "embed_dist");
  cfg.set("embedding_dim", "8");
  cfg.set("embeddings", write_vectors(tmp, 8));
  const std::string dir = tmp.file("m");
  train_model(cfg, splits().train, splits().valid, dir, nullptr, nullptr);
  std::ofstream(cfg.str("embeddings"), std::ios::app) << "zzzunseen 1 2 3 4 5 6 7 8\n";
  EXPECT_THROW(load_model(dir, nullptr), DataError);
}

TEST(Pipeline, CbowTrainsOnFixtureFile) {
  testing::TempDir tmp("fx");
  const Dataset d = load_pairs(testing::data_path("pairs20.csv"), true);
  RunConfig cfg;
  cfg.set("model", "cbow");
  cfg.set("epochs", "2");
  cfg.set("hidden_dim", "8");
  cfg.set("embedding_dim", "4");
  const auto m = train_model(cfg, d, d, tmp.file("m"), nullptr, nullptr);
  const auto s = m->scores(d);
  ASSERT_EQ(s.size(), d.size());
  for (double v : s) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Pipeline, MaxTrainLimitsPairs) {
  testing::TempDir tmp("cap");
  RunConfig cfg;
  cfg.set("model", "lr");
  cfg.set("max_train", "50");
  train_model(cfg, splits().train, splits().valid, tmp.file("m"), nullptr, nullptr);
  EXPECT_EQ(final_line(tmp.file("m")).at("train_pairs").get<int>(), 50);
}

// ---------------------------------------------------------------------------
// Error analysis

TEST(WorstErrors, OrderedByConfidence) {
  const std::vector<double> s{0.9, 0.2, 0.6, 0.05, 0.99, 0.4};
  const std::vector<int> g{0, 1, 0, 1, 1, 1};
  const auto e = worst_errors(s, 0.5, g, 10);
  ASSERT_EQ(e.size(), 5u);
  const std::vector<std::size_t> rows{3, 0, 1, 2, 5};  // 2 and 5 tie; input order kept
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(e[k].row, rows[k]);
  EXPECT_NEAR(e[0].confidence, 0.45, 1e-12);
  EXPECT_EQ(e[0].predicted, 0);
  for (std::size_t k = 1; k < e.size(); ++k) EXPECT_GE(e[k - 1].confidence, e[k].confidence);
  EXPECT_EQ(worst_errors(s, 0.5, g, 2).size(), 2u);
  EXPECT_TRUE(worst_errors(s, 0.5, g, 0).empty());
}

TEST(WorstErrors, PerfectModelHasNone) {
  const std::vector<double> s{0.9, -0.2};
  const std::vector<int> g{1, 0};
  EXPECT_TRUE(worst_errors(s, 0.0, g, 5).empty());
}

// ---------------------------------------------------------------------------
// Sweeps

TEST(Sweeps, PreprocReportsVocabularyAndScores) {
  const auto rows = preproc_sweep({"", "lowercase", "lowercase+remove_punc"}, 1, splits().train, splits().valid, 1, 0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].pipeline, "none");
  EXPECT_GE(rows[0].vocabulary_size, rows[1].vocabulary_size);
  EXPECT_GE(rows[1].vocabulary_size, rows[2].vocabulary_size);
  for (const auto& r : rows) {
    EXPECT_GT(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 100.0);
  }
  std::ostringstream csv;
  write_preproc_csv(csv, rows);
  EXPECT_EQ(csv.str().rfind("pipeline,vocabulary_size,accuracy,f_score\n", 0), 0u);
}

TEST(Sweeps, ConfiguredAlphaGrid) {
  RunConfig cfg;
  cfg.set("sweep", "alpha");
  cfg.set("grid", "0.001,0.01");
  std::ostringstream out;
  run_configured_sweep(cfg, splits().train, splits().valid, out, nullptr, nullptr);
  std::istringstream in(out.str());
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(header.rfind("alpha,", 0), 0u);
  EXPECT_EQ(a.rfind("0.001,", 0), 0u);
  EXPECT_EQ(b.rfind("0.01,", 0), 0u);
}

TEST(Sweeps, UnknownSweepRejected) {
  RunConfig cfg;
  cfg.set("sweep", "dropout");
  std::ostringstream out;
  EXPECT_THROW(run_configured_sweep(cfg, splits().train, splits().valid, out, nullptr, nullptr), ConfigError);
}

// ---------------------------------------------------------------------------
// Stats output

TEST(Stats, HistogramCsvFromFixture) {
  const Dataset d = load_pairs(testing::data_path("pairs20.csv"), true);
  const DatasetStats s = compute_stats(d);
  std::ostringstream csv, text;
  write_histogram_csv(csv, s);
  print_stats(text, s);
  EXPECT_EQ(csv.str(), "occurrences,questions\n1,38\n2,1\n");
  EXPECT_NE(text.str().find("39"), std::string::npos);
}

}  // namespace
}  // namespace dupq
