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

// End-to-end wiring used by the command-line tool: model and feature kinds, training into
// a model directory, reloading, sweeps and error listings.

#pragma once

#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dupq/corpus.hpp"
#include "dupq/dense.hpp"
#include "dupq/embeddings.hpp"
#include "dupq/eval.hpp"
#include "dupq/run_config.hpp"
#include "dupq/text.hpp"
#include "dupq/tree_models.hpp"

namespace dupq {

enum class ModelKind { majority, lr, svm_linear, svm_rbf, dtree, rforest, gbt, cbow, lstm, lstm_attn, bilstm, bilstm_attn };
enum class FeatureKind { unigram, bigram, trigram, hand, embed_concat, embed_dist, tokens };

std::string to_string(ModelKind kind);
std::string to_string(FeatureKind kind);
ModelKind parse_model_kind(const std::string& name);
FeatureKind parse_feature_kind(const std::string& name);

/// Capability tags: what input representation a model consumes or a feature kind produces.
enum Capability : unsigned { kSparse = 1, kDense = 2, kSequence = 4 };
unsigned model_capabilities(ModelKind kind);
Capability feature_capability(FeatureKind kind);
FeatureKind default_features(ModelKind kind);

/// Throws ConfigError explaining why the combination is not supported.
void check_compatible(ModelKind model, FeatureKind features);

/// The configured pipeline, or the default for the feature kind when none is configured
/// (remove_non_ascii for n-grams, tokenize only otherwise).
text::Pipeline resolve_pipeline(const RunConfig& cfg, FeatureKind kind);

DenseMatrix hand_feature_matrix(const Dataset& d);

/// Sentence embeddings (OOV tokens skipped) as concatenated pairs or the seven distances.
DenseMatrix embedding_features(const Dataset& d, FeatureKind kind, const EmbeddingTable& table,
                               const text::Pipeline& pipeline);

/// A trained model able to score pairs. Larger scores mean "more likely duplicate";
/// a pair is predicted duplicate when its score exceeds threshold().
class PairClassifier {
 public:
  virtual ~PairClassifier() = default;
  virtual std::vector<double> scores(const Dataset& d) const = 0;
  virtual double threshold() const = 0;
  std::vector<int> predict(const Dataset& d) const;
};

/// Trains the configured model and writes run.conf, model.bin, features.space and
/// metrics.jsonl into `model_dir`. Progress lines go to `log`.
std::unique_ptr<PairClassifier> train_model(const RunConfig& cfg, const Dataset& train, const Dataset& valid,
                                            const std::string& model_dir, Warnings* warnings, std::ostream* log);

/// Reloads a model directory. Throws DataError when the stored feature space does not match
/// the model (hash or dimension mismatch).
std::unique_ptr<PairClassifier> load_model(const std::string& model_dir, Warnings* warnings);

struct ErrorCase {
  std::size_t row = 0;
  int gold = 0;
  int predicted = 0;
  double score = 0.0;
  double confidence = 0.0;  // |score - threshold|
};

/// The n misclassified rows with the largest confidence, ties in row order.
std::vector<ErrorCase> worst_errors(std::span<const double> scores, double threshold, std::span<const int> gold,
                                    std::size_t n);

struct PreprocRow {
  std::string pipeline;
  std::size_t vocabulary_size = 0;
  double accuracy = 0.0;  // mean over repeats
  double f_score = 0.0;
};

/// Hinge SGD (n_iter 50, alpha 5e-5) on n-gram features of each pipeline, averaged over
/// `repeats` seeds. Pipelines use '+' between steps, e.g. "remove_punc+remove_digits".
std::vector<PreprocRow> preproc_sweep(const std::vector<std::string>& pipelines, int max_n, const Dataset& train,
                                      const Dataset& valid, int repeats, std::uint64_t seed);
void write_preproc_csv(std::ostream& out, const std::vector<PreprocRow>& rows);

/// Runs the sweep named by cfg "sweep" and writes its CSV to `out`.
void run_configured_sweep(const RunConfig& cfg, const Dataset& train, const Dataset& valid, std::ostream& out,
                          Warnings* warnings, std::ostream* log);

/// Human-readable dataset summary and the occurrence histogram as CSV (occurrences,questions).
void print_stats(std::ostream& out, const DatasetStats& s);
void write_histogram_csv(std::ostream& out, const DatasetStats& s);

}  // namespace dupq
