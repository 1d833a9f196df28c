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

#include "dupq/neural_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dupq/binary_io.hpp"
#include "json.hpp"

namespace dupq {

using nn::Mat;
using nn::Vec;

namespace {

constexpr char kMagic[9] = "DUPQNNM";
constexpr std::uint32_t kVersion = 1;

void glorot(Mat& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = (2.0 * rng.uniform01() - 1.0) * limit;
}

}  // namespace

std::string to_string(NeuralKind kind) {
  switch (kind) {
    case NeuralKind::cbow: return "cbow";
    case NeuralKind::lstm: return "lstm";
    case NeuralKind::lstm_attn: return "lstm_attn";
    case NeuralKind::bilstm: return "bilstm";
    case NeuralKind::bilstm_attn: return "bilstm_attn";
  }
  return "?";
}

NeuralKind parse_neural_kind(const std::string& name) {
  for (NeuralKind k : {NeuralKind::cbow, NeuralKind::lstm, NeuralKind::lstm_attn, NeuralKind::bilstm,
                       NeuralKind::bilstm_attn}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown neural model kind '" + name + "'");
}

bool has_attention(NeuralKind kind) { return kind == NeuralKind::lstm_attn || kind == NeuralKind::bilstm_attn; }
bool is_bidirectional(NeuralKind kind) { return kind == NeuralKind::bilstm || kind == NeuralKind::bilstm_attn; }

void NeuralConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (l2_beta < 0) throw ConfigError("l2_beta must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam decays must be in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (oov_sigma < 0) throw ConfigError("oov_sigma must be >= 0");
}

// ---------------------------------------------------------------------------
// Vocabulary

NeuralVocabulary::NeuralVocabulary() : tokens_{kUnknown}, index_{{kUnknown, 0}} {}

NeuralVocabulary NeuralVocabulary::build(const std::vector<TokenSequence>& sentences) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : sentences) {
    for (const auto& t : s) ++counts[t];
  }
  counts.erase(kUnknown);
  std::vector<std::pair<std::string, std::uint64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens{kUnknown};
  for (auto& [t, c] : items) tokens.push_back(t);
  return from_tokens(std::move(tokens));
}

NeuralVocabulary NeuralVocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens[0] != kUnknown) throw DataError("vocabulary must start with " + std::string(kUnknown));
  NeuralVocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second)
      throw DataError("duplicate vocabulary token '" + v.tokens_[i] + "'");
  }
  return v;
}

int NeuralVocabulary::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

std::vector<int> NeuralVocabulary::ids(const TokenSequence& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

// ---------------------------------------------------------------------------
// Model

struct NeuralPairModel::Trace {
  std::vector<int> ids[2];
  nn::LSTMCache fwd[2], bwd[2];
  Mat S[2];
  nn::AttentionOutput att;
  Vec bar[2], raw[2];
  Vec pooled[2];
  Vec m;
  nn::MLPCache mlp;
};

std::size_t NeuralPairModel::add_param(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                                       bool regularized) {
  Param p;
  p.name = name;
  p.value = Mat::Zero(rows, cols);
  p.grad = Mat::Zero(rows, cols);
  p.adam_m = Mat::Zero(rows, cols);
  p.adam_v = Mat::Zero(rows, cols);
  p.regularized = regularized;
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

NeuralPairModel::NeuralPairModel(const NeuralConfig& cfg, NeuralVocabulary vocab, int embedding_dim)
    : cfg_(cfg), vocab_(std::move(vocab)), embedding_dim_(embedding_dim) {
  cfg_.validate();
  if (embedding_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  const Eigen::Index E = embedding_dim, H = cfg.hidden_dim;
  const auto nv = static_cast<Eigen::Index>(vocab_.size());
  Rng rng(cfg.seed);

  add_param("embedding", E, nv, false);
  Mat& emb = params_[0].value;
  for (Eigen::Index w = 1; w < nv; ++w) {
    const auto col = oov_vector(vocab_.token(static_cast<int>(w)), static_cast<std::size_t>(E), cfg.oov_sigma, cfg.seed);
    for (Eigen::Index k = 0; k < E; ++k) emb(k, w) = col[static_cast<std::size_t>(k)];
  }

  Eigen::Index d = E;  // pooled vector size
  if (cfg.kind != NeuralKind::cbow) {
    auto add_lstm = [&](const std::string& prefix) {
      const std::size_t first = add_param(prefix + ".Wx", 4 * H, E, true);
      add_param(prefix + ".Wh", 4 * H, H, true);
      add_param(prefix + ".b", 4 * H, 1, true);
      glorot(params_[first].value, rng);
      glorot(params_[first + 1].value, rng);
      params_[first + 2].value.block(H, 0, H, 1).setOnes();  // forget-gate bias
      return first;
    };
    fwd_ = add_lstm("lstm_fwd");
    d = H;
    if (is_bidirectional(cfg.kind)) {
      bwd_ = add_lstm("lstm_bwd");
      d = 2 * H;
    }
    if (has_attention(cfg.kind)) {
      attn_ = add_param("attn.Wu", d, d, true);
      for (const char* n : {"attn.Vu", "attn.Wv", "attn.Vv"}) add_param(n, d, d, true);
      for (std::size_t k = 0; k < 4; ++k) glorot(params_[attn_ + k].value, rng);
    }
  }

  const bool reg = cfg.kind != NeuralKind::cbow;
  std::vector<Eigen::Index> widths{4 * d};
  const int hidden_layers = cfg.kind == NeuralKind::cbow ? 3 : 1;
  for (int k = 0; k < hidden_layers; ++k) widths.push_back(H);
  widths.push_back(2);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::string id = std::to_string(k + 1);
    head_W_.push_back(add_param("head.W" + id, widths[k + 1], widths[k], reg));
    head_b_.push_back(add_param("head.b" + id, widths[k + 1], 1, reg));
    glorot(params_[head_W_.back()].value, rng);
  }
}

std::size_t NeuralPairModel::load_pretrained(const EmbeddingTable& table) {
  if (table.dim() != static_cast<std::size_t>(embedding_dim_))
    throw DataError("embedding table has dimension " + std::to_string(table.dim()) + ", model expects " +
                    std::to_string(embedding_dim_));
  Mat& emb = params_[0].value;
  std::size_t found = 0;
  for (std::size_t w = 1; w < vocab_.size(); ++w) {
    const std::int64_t r = table.find(vocab_.token(static_cast<int>(w)));
    if (r < 0) continue;
    const auto row = table.row(static_cast<std::size_t>(r));
    for (int k = 0; k < embedding_dim_; ++k) emb(k, static_cast<Eigen::Index>(w)) = row[static_cast<std::size_t>(k)];
    ++found;
  }
  return found;
}

PairIds NeuralPairModel::to_ids(const TokenSequence& q1, const TokenSequence& q2, int label) const {
  return PairIds{vocab_.ids(q1), vocab_.ids(q2), label};
}

Mat NeuralPairModel::encode_sequence(const std::vector<int>& ids, Trace& tr, int side) const {
  const Mat& emb = params_[0].value;
  if (cfg_.kind == NeuralKind::cbow) {
    tr.ids[side] = ids;
    tr.pooled[side] = nn::cbow_encode(emb, ids);
    return Mat();
  }
  // An empty question becomes a single padding token.
  tr.ids[side] = ids.empty() ? std::vector<int>{0} : ids;
  const Mat x = nn::gather(emb, tr.ids[side]);
  tr.fwd[side] = nn::lstm_forward(params_[fwd_].value, params_[fwd_ + 1].value, params_[fwd_ + 2].value, x);
  if (!is_bidirectional(cfg_.kind)) return tr.fwd[side].h;
  tr.bwd[side] =
      nn::lstm_forward(params_[bwd_].value, params_[bwd_ + 1].value, params_[bwd_ + 2].value, nn::reverse_columns(x));
  Mat S(2 * cfg_.hidden_dim, x.cols());
  S << tr.fwd[side].h, nn::reverse_columns(tr.bwd[side].h);
  return S;
}

void NeuralPairModel::forward(const PairIds& ex, Rng* dropout_rng, Trace& tr) const {
  tr.S[0] = encode_sequence(ex.q1, tr, 0);
  tr.S[1] = encode_sequence(ex.q2, tr, 1);
  const NeuralKind kind = cfg_.kind;
  if (has_attention(kind)) {
    tr.att = nn::attention(tr.S[0], tr.S[1]);
    const Mat* bars[2] = {&tr.att.u_bar, &tr.att.v_bar};
    for (int s = 0; s < 2; ++s) {
      if (kind == NeuralKind::lstm_attn) {
        tr.bar[s] = bars[s]->col(bars[s]->cols() - 1);
        tr.raw[s] = tr.S[s].col(tr.S[s].cols() - 1);
      } else {
        tr.bar[s] = bars[s]->rowwise().mean();
        tr.raw[s] = tr.S[s].rowwise().mean();
      }
      const std::size_t W = attn_ + 2 * static_cast<std::size_t>(s);
      tr.pooled[s] = nn::combine(params_[W].value, params_[W + 1].value, tr.bar[s], tr.raw[s]);
    }
  } else if (kind == NeuralKind::lstm) {
    for (int s = 0; s < 2; ++s) tr.pooled[s] = tr.S[s].col(tr.S[s].cols() - 1);
  } else if (kind == NeuralKind::bilstm) {
    for (int s = 0; s < 2; ++s) tr.pooled[s] = tr.S[s].rowwise().mean();
  }
  tr.m = nn::pair_features(tr.pooled[0], tr.pooled[1]);
  std::vector<const Mat*> W, b;
  for (std::size_t k = 0; k < head_W_.size(); ++k) {
    W.push_back(&params_[head_W_[k]].value);
    b.push_back(&params_[head_b_[k]].value);
  }
  nn::mlp_forward(W, b, tr.m, cfg_.dropout, dropout_rng, tr.mlp);
}

void NeuralPairModel::backward_sequence(const Trace& tr, int side, const Mat& dS) {
  const Eigen::Index H = cfg_.hidden_dim;
  Param* p = params_.data();
  Mat dX;
  if (is_bidirectional(cfg_.kind)) {
    dX = nn::lstm_backward(p[fwd_].value, p[fwd_ + 1].value, tr.fwd[side], dS.topRows(H), p[fwd_].grad,
                           p[fwd_ + 1].grad, p[fwd_ + 2].grad);
    dX += nn::reverse_columns(nn::lstm_backward(p[bwd_].value, p[bwd_ + 1].value, tr.bwd[side],
                                                nn::reverse_columns(dS.bottomRows(H)), p[bwd_].grad,
                                                p[bwd_ + 1].grad, p[bwd_ + 2].grad));
  } else {
    dX = nn::lstm_backward(p[fwd_].value, p[fwd_ + 1].value, tr.fwd[side], dS, p[fwd_].grad, p[fwd_ + 1].grad,
                           p[fwd_ + 2].grad);
  }
  Mat& g = params_[0].grad;
  const auto& ids = tr.ids[side];
  for (std::size_t t = 0; t < ids.size(); ++t) g.col(ids[t]) += dX.col(static_cast<Eigen::Index>(t));
}

void NeuralPairModel::backward(const Trace& tr, int label) {
  Vec d_logits = tr.mlp.probs;
  d_logits(label) -= 1.0;
  std::vector<const Mat*> W;
  std::vector<Mat*> dW, db;
  for (std::size_t k = 0; k < head_W_.size(); ++k) {
    W.push_back(&params_[head_W_[k]].value);
    dW.push_back(&params_[head_W_[k]].grad);
    db.push_back(&params_[head_b_[k]].grad);
  }
  const Vec dm = nn::mlp_backward(W, tr.mlp, d_logits, dW, db);
  Vec dpooled[2] = {Vec::Zero(tr.pooled[0].size()), Vec::Zero(tr.pooled[1].size())};
  nn::pair_features_backward(tr.pooled[0], tr.pooled[1], dm, dpooled[0], dpooled[1]);

  const NeuralKind kind = cfg_.kind;
  if (kind == NeuralKind::cbow) {
    Mat& g = params_[0].grad;
    for (int s = 0; s < 2; ++s) {
      for (int id : tr.ids[s]) g.col(id) += dpooled[s];
    }
    return;
  }
  Mat dS[2] = {Mat::Zero(tr.S[0].rows(), tr.S[0].cols()), Mat::Zero(tr.S[1].rows(), tr.S[1].cols())};
  const bool last_only = kind == NeuralKind::lstm || kind == NeuralKind::lstm_attn;
  // Distributes a pooled-vector gradient over the per-token states.
  auto spread = [&](Mat& target, const Vec& g) {
    if (last_only) {
      target.col(target.cols() - 1) += g;
    } else {
      target.colwise() += g / static_cast<double>(target.cols());
    }
  };
  if (has_attention(kind)) {
    Mat dbar[2] = {Mat::Zero(tr.S[0].rows(), tr.S[0].cols()), Mat::Zero(tr.S[1].rows(), tr.S[1].cols())};
    for (int s = 0; s < 2; ++s) {
      const std::size_t Wi = attn_ + 2 * static_cast<std::size_t>(s);
      Vec d_bar = Vec::Zero(tr.bar[s].size()), d_raw = Vec::Zero(tr.raw[s].size());
      nn::combine_backward(params_[Wi].value, params_[Wi + 1].value, tr.bar[s], tr.raw[s], tr.pooled[s], dpooled[s],
                           params_[Wi].grad, params_[Wi + 1].grad, d_bar, d_raw);
      spread(dbar[s], d_bar);
      spread(dS[s], d_raw);
    }
    nn::attention_backward(tr.S[0], tr.S[1], tr.att, dbar[0], dbar[1], dS[0], dS[1]);
  } else {
    for (int s = 0; s < 2; ++s) spread(dS[s], dpooled[s]);
  }
  for (int s = 0; s < 2; ++s) backward_sequence(tr, s, dS[s]);
}

EncoderState NeuralPairModel::encode(const PairIds& ex) const {
  Trace tr;
  forward(ex, nullptr, tr);
  return EncoderState{tr.S[0], tr.S[1], tr.pooled[0], tr.pooled[1]};
}

Vec NeuralPairModel::predict_proba(const PairIds& ex) const {
  Trace tr;
  forward(ex, nullptr, tr);
  return tr.mlp.probs;
}

std::vector<int> NeuralPairModel::predict(std::span<const PairIds> data) const {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(predict(ex));
  return out;
}

void NeuralPairModel::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

double NeuralPairModel::l2_penalty() const {
  const double beta = cfg_.effective_l2();
  if (beta == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& p : params_) {
    if (p.regularized) s += p.value.squaredNorm();
  }
  return 0.5 * beta * s;
}

double NeuralPairModel::batch_loss(std::span<const PairIds> batch, Rng* dropout_rng, bool grad) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (grad) zero_grad();
  double total = 0.0;
  for (const auto& ex : batch) {
    if (ex.label != 0 && ex.label != 1) throw std::invalid_argument("neural model: labels must be 0 or 1");
    Trace tr;
    forward(ex, dropout_rng, tr);
    total -= std::log(std::max(tr.mlp.probs(ex.label), 1e-300));
    if (grad) backward(tr, ex.label);
  }
  const double n = static_cast<double>(batch.size());
  if (grad) {
    const double beta = cfg_.effective_l2();
    for (auto& p : params_) {
      p.grad /= n;
      if (p.regularized && beta > 0) p.grad += beta * p.value;
    }
  }
  return total / n + l2_penalty();
}

// ---------------------------------------------------------------------------
// Training

void Adam::step(std::vector<Param>& params, const NeuralConfig& cfg) {
  ++t_;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto& p : params) {
    p.adam_m = b1 * p.adam_m + (1.0 - b1) * p.grad;
    p.adam_v = b2 * p.adam_v + (1.0 - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        cfg.learning_rate * (p.adam_m.array() / c1) / ((p.adam_v.array() / c2).sqrt() + cfg.epsilon);
  }
}

NeuralTrainResult train_neural(NeuralPairModel& model, const std::vector<PairIds>& train,
                               const std::vector<PairIds>& valid, std::ostream* metrics_log) {
  if (train.empty()) throw DataError("neural training: empty training set");
  const NeuralConfig& cfg = model.config();
  Rng order_rng(cfg.seed ^ 0x6a09e667f3bcc909ULL);
  Rng dropout_rng(cfg.seed ^ 0xbb67ae8584caa73bULL);
  Adam adam;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  NeuralTrainResult result;
  std::vector<Mat> best;
  double best_acc = -1.0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<PairIds> batch;
  const std::vector<int> valid_gold = [&] {
    std::vector<int> g;
    for (const auto& ex : valid) g.push_back(ex.label);
    return g;
  }();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += bs) {
      batch.clear();
      for (std::size_t k = b; k < std::min(order.size(), b + bs); ++k) batch.push_back(train[order[k]]);
      const double loss = model.batch_loss(batch, cfg.dropout > 0 ? &dropout_rng : nullptr, true);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite loss in epoch " << epoch << ", batch starting at position " << b << " (size "
            << batch.size() << ", first row " << order[b] << ")";
        throw NumericError(msg.str());
      }
      loss_sum += loss * static_cast<double>(batch.size());
      adam.step(model.params(), cfg);
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = loss_sum / static_cast<double>(train.size());
    if (!valid.empty()) {
      const Metrics m = score(model.predict(valid), valid_gold);
      em.valid_accuracy = m.accuracy;
      em.valid_f_score = m.f_score;
    }
    em.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(em);
    if (valid.empty() || em.valid_accuracy > best_acc) {
      best_acc = em.valid_accuracy;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : model.params()) best.push_back(p.value);
    }
    if (metrics_log != nullptr) {
      nlohmann::json j = {{"epoch", em.epoch},
                          {"model", to_string(cfg.kind)},
                          {"train_loss", em.train_loss},
                          {"valid_accuracy", em.valid_accuracy},
                          {"valid_f_score", em.valid_f_score},
                          {"seconds", em.seconds},
                          {"best_epoch", result.best_epoch}};
      *metrics_log << j.dump() << '\n' << std::flush;
    }
  }
  auto& params = model.params();
  for (std::size_t k = 0; k < params.size(); ++k) params[k].value = best[k];
  return result;
}

double gradient_check(NeuralPairModel& model, std::span<const PairIds> batch, double step) {
  model.batch_loss(batch, nullptr, true);
  std::vector<Mat> analytic;
  for (const auto& p : model.params()) analytic.push_back(p.grad);
  double worst = 0.0;
  auto& params = model.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat& value = params[k].value;
    for (Eigen::Index e = 0; e < value.size(); ++e) {
      const double saved = value.data()[e];
      value.data()[e] = saved + step;
      const double plus = model.batch_loss(batch, nullptr, false);
      value.data()[e] = saved - step;
      const double minus = model.batch_loss(batch, nullptr, false);
      value.data()[e] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[k].data()[e];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

double gradient_check(NeuralKind kind, std::uint64_t seed) {
  NeuralConfig cfg;
  cfg.kind = kind;
  cfg.hidden_dim = 4;
  cfg.dropout = 0.0;
  cfg.oov_sigma = 0.5;
  cfg.seed = seed;
  const NeuralVocabulary vocab = NeuralVocabulary::from_tokens({NeuralVocabulary::kUnknown, "a", "b", "c", "d", "e"});
  NeuralPairModel model(cfg, vocab, 3);
  // Exercise the padding row too.
  Rng rng(seed + 1);
  for (Eigen::Index k = 0; k < 3; ++k) model.params()[0].value(k, 0) = 0.5 * rng.normal();
  const std::vector<PairIds> batch = {
      {{1, 2, 3}, {3, 1}, 1},
      {{4}, {5, 5, 2}, 0},
      {{2, 4}, {}, 0},
  };
  return gradient_check(model, batch);
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_neural_model(const NeuralPairModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const NeuralConfig& c = model.config();
  bin::put_header(out, kMagic, kVersion);
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.kind));
  bin::put<std::int32_t>(out, c.hidden_dim);
  bin::put<std::int32_t>(out, model.embedding_dim());
  for (double v : {c.dropout, c.l2_beta, c.learning_rate, c.beta1, c.beta2, c.epsilon, c.oov_sigma}) bin::put(out, v);
  bin::put<std::int32_t>(out, c.epochs);
  bin::put<std::int32_t>(out, c.batch_size);
  bin::put<std::uint64_t>(out, c.seed);
  const auto& tokens = model.vocabulary().tokens();
  bin::put<std::uint64_t>(out, tokens.size());
  for (const auto& t : tokens) bin::put_string(out, t);
  bin::put<std::uint64_t>(out, model.params().size());
  for (const auto& p : model.params()) {
    bin::put_string(out, p.name);
    bin::put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    bin::put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!out) throw DataError("write failed: " + path);
}

NeuralPairModel load_neural_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::get_header(in, kMagic, kVersion, path);
  NeuralConfig c;
  const auto kind = bin::get<std::uint32_t>(in, path);
  if (kind > static_cast<std::uint32_t>(NeuralKind::bilstm_attn)) throw DataError(path + ": unknown model kind");
  c.kind = static_cast<NeuralKind>(kind);
  c.hidden_dim = bin::get<std::int32_t>(in, path);
  const int emb_dim = bin::get<std::int32_t>(in, path);
  for (double* v : {&c.dropout, &c.l2_beta, &c.learning_rate, &c.beta1, &c.beta2, &c.epsilon, &c.oov_sigma})
    *v = bin::get<double>(in, path);
  c.epochs = bin::get<std::int32_t>(in, path);
  c.batch_size = bin::get<std::int32_t>(in, path);
  c.seed = bin::get<std::uint64_t>(in, path);
  const auto n_tokens = bin::get<std::uint64_t>(in, path);
  if (n_tokens == 0 || n_tokens > (std::uint64_t{1} << 31)) throw DataError(path + ": bad vocabulary size");
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint64_t k = 0; k < n_tokens; ++k) tokens.push_back(bin::get_string(in, path));
  try {
    c.validate();
    NeuralPairModel model(c, NeuralVocabulary::from_tokens(std::move(tokens)), emb_dim);
    const auto n_params = bin::get<std::uint64_t>(in, path);
    if (n_params != model.params().size()) throw DataError(path + ": parameter count does not match model kind");
    for (auto& p : model.params()) {
      const std::string name = bin::get_string(in, path);
      const auto rows = bin::get<std::uint64_t>(in, path);
      const auto cols = bin::get<std::uint64_t>(in, path);
      if (name != p.name || rows != static_cast<std::uint64_t>(p.value.rows()) ||
          cols != static_cast<std::uint64_t>(p.value.cols()))
        throw DataError(path + ": parameter '" + name + "' does not match the expected shape");
      if (!in.read(reinterpret_cast<char*>(p.value.data()),
                   static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double)))))
        throw DataError("truncated file " + path);
      if (!p.value.allFinite()) throw DataError(path + ": non-finite parameter in '" + name + "'");
    }
    return model;
  } catch (const ConfigError& e) {
    throw DataError(path + ": invalid stored configuration: " + e.what());
  }
}

}  // namespace dupq
