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

#include "dupq/linear_models.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dupq/binary_io.hpp"

namespace dupq {

namespace {

constexpr char kMagic[9] = "DUPQLIN";
constexpr std::uint32_t kVersion = 1;

// Below this the scale is folded back into the weights.
constexpr double kMinScale = 1e-9;

double loss_value(Loss loss, double p, double y) {
  const double z = p * y;
  if (loss == Loss::hinge) return z < 1.0 ? 1.0 - z : 0.0;
  // log(1 + exp(-z)), stable for both signs.
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// Derivative of the loss with respect to p.
double dloss(Loss loss, double p, double y) {
  const double z = p * y;
  if (loss == Loss::hinge) return z < 1.0 ? -y : 0.0;
  return -y * sigmoid(-z);
}

void check_inputs(const SparseMatrix& X, std::span<const int> y, const SGDConfig& cfg) {
  cfg.validate();
  if (X.rows() != y.size())
    throw std::invalid_argument("train_sgd: " + std::to_string(X.rows()) + " rows but " +
                                std::to_string(y.size()) + " labels");
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("train_sgd: labels must be 0 or 1");
  }
}

[[noreturn]] void non_finite(int epoch, std::size_t step, std::size_t row, double p) {
  std::ostringstream msg;
  msg << "non-finite value during SGD (epoch " << epoch << ", step " << step << ", row " << row
      << ", score " << p << "); try a larger alpha";
  throw NumericError(msg.str());
}

}  // namespace

std::string to_string(Loss loss) { return loss == Loss::logistic ? "logistic" : "hinge"; }

Loss parse_loss(const std::string& name) {
  if (name == "logistic" || name == "log") return Loss::logistic;
  if (name == "hinge") return Loss::hinge;
  throw ConfigError("unknown loss '" + name + "' (expected logistic or hinge)");
}

void SGDConfig::validate() const {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
  if (t0 < 0 || !std::isfinite(t0)) throw ConfigError("t0 must be > 0 (or 0 for the default)");
}

LinearModel train_sgd(const SparseMatrix& X, std::span<const int> y, const SGDConfig& cfg,
                      SGDTrace* trace) {
  check_inputs(X, y, cfg);
  if (trace != nullptr) *trace = SGDTrace{};
  const double alpha = cfg.alpha, t0 = cfg.effective_t0();
  // Effective weights are scale * v.
  std::vector<double> v(X.cols(), 0.0);
  double scale = 1.0, bias = 0.0;
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  std::size_t t = 0;
  for (int epoch = 0; epoch < cfg.n_iter; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t i : order) {
      const SparseRow x = X.row(i);
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      const double p = scale * dot(x, v) + bias;
      if (!std::isfinite(p)) non_finite(epoch, t, i, p);
      loss_sum += loss_value(cfg.loss, p, yi);
      const double eta = 1.0 / (alpha * (static_cast<double>(t) + t0));
      if (trace != nullptr) trace->etas.push_back(eta);
      const double update = -eta * dloss(cfg.loss, p, yi);
      scale *= std::max(0.0, 1.0 - eta * alpha);
      if (scale < kMinScale) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
      if (update != 0.0) {
        const double step = update / scale;
        for (std::size_t k = 0; k < x.indices.size(); ++k) v[x.indices[k]] += step * x.values[k];
        bias += update;
      }
      ++t;
    }
    const double mean_loss = X.rows() > 0 ? loss_sum / static_cast<double>(X.rows()) : 0.0;
    if (!std::isfinite(mean_loss)) non_finite(epoch, t, order.empty() ? 0 : order.back(), mean_loss);
    if (trace != nullptr) trace->epoch_losses.push_back(mean_loss);
  }
  LinearModel m;
  m.weights.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    m.weights[j] = scale * v[j];
    if (!std::isfinite(m.weights[j])) non_finite(cfg.n_iter, t, 0, m.weights[j]);
  }
  m.bias = bias;
  return m;
}

LinearModel train_sgd_dense(const SparseMatrix& X, std::span<const int> y, const SGDConfig& cfg) {
  check_inputs(X, y, cfg);
  const std::size_t d = X.cols();
  const std::vector<double> dense = X.to_dense();
  const double alpha = cfg.alpha, t0 = cfg.effective_t0();
  std::vector<double> w(d, 0.0);
  double bias = 0.0;
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  std::size_t t = 0;
  for (int epoch = 0; epoch < cfg.n_iter; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double* x = dense.data() + i * d;
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      double p = bias;
      for (std::size_t j = 0; j < d; ++j) p += w[j] * x[j];
      if (!std::isfinite(p)) non_finite(epoch, t, i, p);
      const double eta = 1.0 / (alpha * (static_cast<double>(t) + t0));
      const double update = -eta * dloss(cfg.loss, p, yi);
      const double decay = std::max(0.0, 1.0 - eta * alpha);
      for (std::size_t j = 0; j < d; ++j) w[j] = w[j] * decay + update * x[j];
      bias += update;
      ++t;
    }
  }
  return LinearModel{std::move(w), bias, 0};
}

Prediction predict(const LinearModel& model, const SparseRow& x) {
  if (!x.indices.empty() && x.indices.back() >= model.dim())
    throw std::invalid_argument("predict: feature index " + std::to_string(x.indices.back()) +
                                " outside model dimension " + std::to_string(model.dim()));
  const double s = dot(x, model.weights) + model.bias;
  return {s > 0.0 ? 1 : 0, s};
}

Prediction predict(const LinearModel& model, const SparseVector& x) {
  return predict(model, SparseRow{x.indices, x.values});
}

std::vector<int> predict_labels(const LinearModel& model, const SparseMatrix& X) {
  if (X.cols() != model.dim())
    throw std::invalid_argument("predict: matrix has " + std::to_string(X.cols()) +
                                " columns, model has " + std::to_string(model.dim()));
  std::vector<int> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(model, X.row(i)).label;
  return out;
}

double predict_proba(const LinearModel& model, const SparseRow& x) {
  return sigmoid(predict(model, x).score);
}

double objective(const LinearModel& model, const SparseMatrix& X, std::span<const int> y, Loss loss,
                 double alpha) {
  double total = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    total += loss_value(loss, predict(model, X.row(i)).score, y[i] == 1 ? 1.0 : -1.0);
  double norm2 = 0.0;
  for (double w : model.weights) norm2 += w * w;
  return total / static_cast<double>(std::max<std::size_t>(1, X.rows())) + 0.5 * alpha * norm2;
}

void save_linear_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::put_header(out, kMagic, kVersion);
  bin::put<std::uint64_t>(out, model.feature_space_hash);
  bin::put<std::uint64_t>(out, model.dim());
  bin::put_array(out, model.weights);
  bin::put(out, model.bias);
  if (!out) throw DataError("write failed: " + path);
}

LinearModel load_linear_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::get_header(in, kMagic, kVersion, path);
  LinearModel m;
  m.feature_space_hash = bin::get<std::uint64_t>(in, path);
  const auto dim = bin::get<std::uint64_t>(in, path);
  bin::get_array(in, m.weights, dim, path);
  m.bias = bin::get<double>(in, path);
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw DataError(path + ": non-finite weight");
  }
  return m;
}

std::vector<SweepRow> hyperparameter_sweep(const std::vector<SGDConfig>& grid, const SparseMatrix& X_train,
                                           std::span<const int> y_train, const SparseMatrix& X_valid,
                                           std::span<const int> y_valid) {
  if (grid.empty()) throw ConfigError("hyperparameter sweep needs at least one setting");
  std::vector<std::string> names;
  for (const auto& c : grid) {
    std::ostringstream s;
    s << to_string(c.loss) << " alpha=" << c.alpha;
    names.push_back(s.str());
  }
  return run_sweep(names, [&](std::size_t i) {
    const LinearModel m = train_sgd(X_train, y_train, grid[i]);
    return score(predict_labels(m, X_valid), y_valid);
  });
}

}  // namespace dupq
