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
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dupq/common.hpp"
#include "dupq/embeddings.hpp"
#include "dupq/eval.hpp"
#include "dupq/neural_layers.hpp"
#include "dupq/text.hpp"

namespace dupq {

enum class NeuralKind { cbow, lstm, lstm_attn, bilstm, bilstm_attn };

std::string to_string(NeuralKind kind);
NeuralKind parse_neural_kind(const std::string& name);
bool has_attention(NeuralKind kind);
bool is_bidirectional(NeuralKind kind);

struct NeuralConfig {
  NeuralKind kind = NeuralKind::cbow;
  int hidden_dim = 300;
  double dropout = 0.1;
  /// L2 weight on non-embedding parameters; ignored for CBOW.
  double l2_beta = 0.01;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 10;
  int batch_size = 128;
  /// Standard deviation of the initial rows for words missing from the pretrained table.
  double oov_sigma = 0.1;
  std::uint64_t seed = 0;

  double effective_l2() const { return kind == NeuralKind::cbow ? 0.0 : l2_beta; }
  void validate() const;  // throws ConfigError
};

/// Token ids; id 0 is reserved for unknown tokens and for padding empty questions.
class NeuralVocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  NeuralVocabulary();
  /// Every token seen in `sentences`, ordered by count (descending) then lexicographically.
  static NeuralVocabulary build(const std::vector<TokenSequence>& sentences);
  static NeuralVocabulary from_tokens(std::vector<std::string> tokens);  // tokens[0] must be kUnknown

  std::size_t size() const { return tokens_.size(); }
  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<int> ids(const TokenSequence& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct PairIds {
  std::vector<int> q1;
  std::vector<int> q2;
  int label = 0;
};

struct Param {
  std::string name;
  nn::Mat value;
  nn::Mat grad;
  nn::Mat adam_m;
  nn::Mat adam_v;
  bool regularized = false;
};

/// Per-token states and pooled vectors of the two questions.
struct EncoderState {
  nn::Mat U, V;
  nn::Vec u, v;
};

class NeuralPairModel {
 public:
  /// Allocates and initializes all parameters. Embedding rows start as Gaussian samples
  /// (row 0 is zero); load_pretrained overwrites rows for known words.
  NeuralPairModel(const NeuralConfig& cfg, NeuralVocabulary vocab, int embedding_dim);

  /// Copies rows for vocabulary words found in `table`; returns how many were found.
  std::size_t load_pretrained(const EmbeddingTable& table);

  const NeuralConfig& config() const { return cfg_; }
  NeuralConfig& mutable_config() { return cfg_; }
  const NeuralVocabulary& vocabulary() const { return vocab_; }
  int embedding_dim() const { return embedding_dim_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  const nn::Mat& embeddings() const { return params_[0].value; }

  PairIds to_ids(const TokenSequence& q1, const TokenSequence& q2, int label = 0) const;

  /// Encoder output in evaluation mode. For attention kinds u and v are u* and v*.
  EncoderState encode(const PairIds& ex) const;

  /// Class probabilities [p(not duplicate), p(duplicate)] in evaluation mode.
  nn::Vec predict_proba(const PairIds& ex) const;
  int predict(const PairIds& ex) const { return predict_proba(ex)(1) > 0.5 ? 1 : 0; }
  std::vector<int> predict(std::span<const PairIds> data) const;

  /// Mean cross-entropy over the batch plus the L2 term. When `grad` is set, parameter
  /// gradients are overwritten with the gradient of that loss. Dropout is applied when
  /// `dropout_rng` is non-null.
  double batch_loss(std::span<const PairIds> batch, Rng* dropout_rng, bool grad);

  /// (beta / 2) * sum of squares of regularized parameters.
  double l2_penalty() const;

  void zero_grad();

 private:
  struct Trace;
  void forward(const PairIds& ex, Rng* dropout_rng, Trace& tr) const;
  void backward(const Trace& tr, int label);
  nn::Mat encode_sequence(const std::vector<int>& ids, Trace& tr, int side) const;
  void backward_sequence(const Trace& tr, int side, const nn::Mat& dS);
  std::size_t add_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, bool regularized);

  NeuralConfig cfg_;
  NeuralVocabulary vocab_;
  int embedding_dim_;
  std::vector<Param> params_;
  // Parameter indices.
  std::size_t fwd_ = 0, bwd_ = 0, attn_ = 0;
  std::vector<std::size_t> head_W_, head_b_;
};

/// One Adam step over every parameter with bias correction.
class Adam {
 public:
  void step(std::vector<Param>& params, const NeuralConfig& cfg);
  std::int64_t steps() const { return t_; }

 private:
  std::int64_t t_ = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_accuracy = 0.0;
  double valid_f_score = 0.0;
  double seconds = 0.0;
};

struct NeuralTrainResult {
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
};

/// Mini-batch training; the model ends holding the parameters of the epoch with the best
/// validation accuracy. Each epoch is appended to `metrics_log` as a JSON line.
NeuralTrainResult train_neural(NeuralPairModel& model, const std::vector<PairIds>& train,
                               const std::vector<PairIds>& valid, std::ostream* metrics_log = nullptr);

/// Largest relative error |a - n| / max(|a|, |n|, 1e-6) between analytic gradients and
/// central differences (step 1e-5) over every parameter of `model` on `batch`, dropout off.
double gradient_check(NeuralPairModel& model, std::span<const PairIds> batch, double step = 1e-5);

/// Tiny randomly initialized instance (hidden 4, embeddings 3, questions of up to 3 tokens).
double gradient_check(NeuralKind kind, std::uint64_t seed = 0);

/// "DUPQNNM\0" | u32 version | config block | vocabulary | u64 n_params |
/// per parameter: name, u64 rows, u64 cols, f64 values (column-major)
void save_neural_model(const NeuralPairModel& model, const std::string& path);
NeuralPairModel load_neural_model(const std::string& path);

}  // namespace dupq
