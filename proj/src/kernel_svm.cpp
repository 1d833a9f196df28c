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

#include "dupq/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <numeric>
#include <sstream>

#include "dupq/binary_io.hpp"

namespace dupq {

namespace {

constexpr char kMagic[9] = "DUPQSVM";
constexpr std::uint32_t kVersion = 1;
constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Computes kernel rows on demand and keeps the most recently used ones.
class KernelCache {
 public:
  KernelCache(const DenseMatrix& X, Kernel kernel, double gamma, std::size_t budget_bytes)
      : X_(X), kernel_(kernel), gamma_(gamma), rows_(static_cast<std::size_t>(X.rows())) {
    sq_norms_ = X.rowwise().squaredNorm();
    const std::size_t row_bytes = std::max<std::size_t>(1, rows_ * sizeof(float));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    data_.resize(rows_);
    where_.resize(rows_);
  }

  double diag(std::size_t i) const { return kernel_ == Kernel::rbf ? 1.0 : sq_norms_(static_cast<Eigen::Index>(i)); }

  const std::vector<float>& row(std::size_t i) {
    if (!data_[i].empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return data_[i];
    }
    if (lru_.size() >= capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      std::vector<float>().swap(data_[victim]);
    }
    const Eigen::VectorXd dots = X_ * X_.row(static_cast<Eigen::Index>(i)).transpose();
    std::vector<float>& out = data_[i];
    out.resize(rows_);
    for (std::size_t k = 0; k < rows_; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      if (kernel_ == Kernel::linear) {
        out[k] = static_cast<float>(dots(kk));
      } else {
        const double d2 = std::max(0.0, sq_norms_(kk) + sq_norms_(static_cast<Eigen::Index>(i)) - 2.0 * dots(kk));
        out[k] = static_cast<float>(std::exp(-gamma_ * d2));
      }
    }
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return out;
  }

 private:
  const DenseMatrix& X_;
  Kernel kernel_;
  double gamma_;
  std::size_t rows_;
  std::size_t capacity_;
  Eigen::VectorXd sq_norms_;
  std::vector<std::vector<float>> data_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
};

double kernel_value(Kernel kernel, double gamma, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  if (kernel == Kernel::linear) {
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

}  // namespace

std::string to_string(Kernel k) { return k == Kernel::linear ? "linear" : "rbf"; }

Kernel parse_kernel(const std::string& name) {
  if (name == "linear") return Kernel::linear;
  if (name == "rbf") return Kernel::rbf;
  throw ConfigError("unknown kernel '" + name + "' (expected linear or rbf)");
}

void KernelSVMConfig::validate() const {
  if (!(C > 0) || !std::isfinite(C)) throw ConfigError("C must be > 0");
  if (gamma < 0 || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0 (or 0 for 1/features)");
  if (max_iter < 0) throw ConfigError("max_iter must be >= 0");
  if (!(tolerance > 0)) throw ConfigError("tolerance must be > 0");
  if (row_cap < 2) throw ConfigError("row_cap must be >= 2");
}

KernelSVMModel train_kernel_svm(const DenseMatrix& X_in, std::span<const int> y_in, const KernelSVMConfig& cfg,
                                Warnings* warnings, SMOReport* report) {
  cfg.validate();
  if (static_cast<std::size_t>(X_in.rows()) != y_in.size())
    throw std::invalid_argument("train_kernel_svm: row count does not match label count");
  if (X_in.rows() == 0) throw std::invalid_argument("train_kernel_svm: empty training set");
  if (!X_in.allFinite()) throw NumericError("train_kernel_svm: non-finite feature value");

  // Seeded subsample above the row cap, keeping original order.
  DenseMatrix X_sub;
  std::vector<int> y_sub;
  const DenseMatrix* Xp = &X_in;
  std::span<const int> y = y_in;
  if (y_in.size() > cfg.row_cap) {
    std::vector<std::size_t> idx(y_in.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(cfg.seed);
    rng.shuffle(idx);
    idx.resize(cfg.row_cap);
    std::sort(idx.begin(), idx.end());
    X_sub.resize(static_cast<Eigen::Index>(idx.size()), X_in.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      X_sub.row(static_cast<Eigen::Index>(r)) = X_in.row(static_cast<Eigen::Index>(idx[r]));
      y_sub.push_back(y_in[idx[r]]);
    }
    warn(warnings, "kernel SVM: subsampled " + std::to_string(y_in.size()) + " rows to " +
                       std::to_string(cfg.row_cap));
    Xp = &X_sub;
    y = y_sub;
  }
  const DenseMatrix& X = *Xp;
  const std::size_t n = y.size();

  KernelSVMModel model;
  model.kernel = cfg.kernel;
  model.C = cfg.C;
  model.gamma = cfg.gamma > 0 ? cfg.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, X.cols()));
  model.support_vectors.resize(0, X.cols());

  std::vector<double> ys(n);
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("train_kernel_svm: labels must be 0 or 1");
    ys[i] = y[i] == 1 ? 1.0 : -1.0;
    n_pos += y[i] == 1;
  }
  if (report != nullptr) *report = SMOReport{0, true, 0.0, n};
  if (n_pos == 0 || n_pos == n) {
    // One class: the constant decision function.
    model.bias = n_pos == n ? 1.0 : -1.0;
    warn(warnings, "kernel SVM: training labels contain a single class");
    return model;
  }

  const double C = cfg.C;
  KernelCache cache(X, cfg.kernel, model.gamma, cfg.cache_mb << 20);
  std::vector<double> alpha(n, 0.0), G(n, -1.0), QD(n);
  for (std::size_t i = 0; i < n; ++i) QD[i] = cache.diag(i);

  const std::int64_t limit =
      cfg.max_iter > 0 ? cfg.max_iter : std::max<std::int64_t>(10'000'000, 100 * static_cast<std::int64_t>(n));
  std::int64_t iter = 0;
  bool converged = false;
  double violation = 0.0;
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  while (iter < limit) {
    // Maximal violating index i from the "up" set.
    double Gmax = -kInf;
    std::ptrdiff_t ii = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (ys[t] > 0) {
        if (!upper(t) && -G[t] >= Gmax) Gmax = -G[t], ii = static_cast<std::ptrdiff_t>(t);
      } else {
        if (!lower(t) && G[t] >= Gmax) Gmax = G[t], ii = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (ii < 0) {
      converged = true;
      break;
    }
    const auto i = static_cast<std::size_t>(ii);
    const std::vector<float>& Ki = cache.row(i);
    // Second-order choice of j from the "low" set.
    double Gmax2 = -kInf, best = kInf;
    std::ptrdiff_t jj = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const double Qit = ys[i] * ys[t] * Ki[t];
      if (ys[t] > 0) {
        if (lower(t)) continue;
        const double diff = Gmax + G[t];
        Gmax2 = std::max(Gmax2, G[t]);
        if (diff > 0) {
          const double a = QD[i] + QD[t] - 2.0 * ys[i] * Qit;
          const double obj = -(diff * diff) / (a > 0 ? a : kTau);
          if (obj <= best) best = obj, jj = static_cast<std::ptrdiff_t>(t);
        }
      } else {
        if (upper(t)) continue;
        const double diff = Gmax - G[t];
        Gmax2 = std::max(Gmax2, -G[t]);
        if (diff > 0) {
          const double a = QD[i] + QD[t] + 2.0 * ys[i] * Qit;
          const double obj = -(diff * diff) / (a > 0 ? a : kTau);
          if (obj <= best) best = obj, jj = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    violation = Gmax + Gmax2;
    if (violation < cfg.tolerance || jj < 0) {
      converged = true;
      break;
    }
    ++iter;
    const auto j = static_cast<std::size_t>(jj);
    const double Kij = Ki[j];
    const double curvature = QD[i] + QD[j] - 2.0 * Kij;
    if (curvature < -1e-6 * (1.0 + QD[i] + QD[j])) {
      std::ostringstream msg;
      msg << "kernel SVM: negative curvature " << curvature << " between rows " << i << " and " << j
          << " (kernel is not positive semi-definite)";
      throw NumericError(msg.str());
    }
    const double quad = curvature > 0 ? curvature : kTau;
    const double old_i = alpha[i], old_j = alpha[j];
    if (ys[i] != ys[j]) {
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    // Capacity is at least two rows and i is the most recent, so Ki survives this fetch.
    const std::vector<float>& Kj = cache.row(j);
    for (std::size_t t = 0; t < n; ++t) G[t] += ys[t] * (ys[i] * Ki[t] * di + ys[j] * Kj[t] * dj);
    if (!std::isfinite(G[i]) || !std::isfinite(G[j]))
      throw NumericError("kernel SVM: non-finite gradient at iteration " + std::to_string(iter));
  }
  if (!converged)
    warn(warnings, "kernel SVM: reached max_iter " + std::to_string(limit) + " with KKT violation " +
                       std::to_string(violation));

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yG = ys[t] * G[t];
    if (upper(t)) {
      if (ys[t] < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (lower(t)) {
      if (ys[t] > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  model.bias = -rho;

  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) sv.push_back(t);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  model.dual_coef.resize(sv.size());
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(sv[k]));
    model.dual_coef[k] = alpha[sv[k]] * ys[sv[k]];
  }
  if (report != nullptr) *report = SMOReport{iter, converged, violation, n};
  return model;
}

double decision_value(const KernelSVMModel& model, std::span<const double> x) {
  if (x.size() != model.dim() && model.support_vectors.rows() > 0)
    throw std::invalid_argument("kernel SVM: input has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.dim()));
  double s = model.bias;
  const auto d = static_cast<std::size_t>(model.support_vectors.cols());
  for (std::size_t k = 0; k < model.dual_coef.size(); ++k) {
    const std::span<const double> v(model.support_vectors.row(static_cast<Eigen::Index>(k)).data(), d);
    s += model.dual_coef[k] * kernel_value(model.kernel, model.gamma, v, x);
  }
  return s;
}

std::vector<int> predict_labels(const KernelSVMModel& model, const DenseMatrix& X) {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  const auto d = static_cast<std::size_t>(X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    out[static_cast<std::size_t>(r)] = decision_value(model, std::span<const double>(X.row(r).data(), d)) > 0 ? 1 : 0;
  return out;
}

void save_kernel_svm(const KernelSVMModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::put_header(out, kMagic, kVersion);
  bin::put<std::uint32_t>(out, model.kernel == Kernel::linear ? 0 : 1);
  bin::put(out, model.gamma);
  bin::put(out, model.C);
  bin::put(out, model.bias);
  bin::put<std::uint64_t>(out, model.dual_coef.size());
  bin::put<std::uint64_t>(out, model.dim());
  bin::put_array(out, model.dual_coef);
  const auto& sv = model.support_vectors;
  out.write(reinterpret_cast<const char*>(sv.data()), static_cast<std::streamsize>(sv.size() * sizeof(double)));
  if (!out) throw DataError("write failed: " + path);
}

KernelSVMModel load_kernel_svm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::get_header(in, kMagic, kVersion, path);
  KernelSVMModel m;
  const auto kernel = bin::get<std::uint32_t>(in, path);
  if (kernel > 1) throw DataError(path + ": unknown kernel code");
  m.kernel = kernel == 0 ? Kernel::linear : Kernel::rbf;
  m.gamma = bin::get<double>(in, path);
  m.C = bin::get<double>(in, path);
  m.bias = bin::get<double>(in, path);
  const auto n_sv = bin::get<std::uint64_t>(in, path);
  const auto dim = bin::get<std::uint64_t>(in, path);
  bin::get_array(in, m.dual_coef, n_sv, path);
  std::vector<double> flat;
  bin::get_array(in, flat, n_sv * dim, path);
  m.support_vectors = Eigen::Map<const DenseMatrix>(flat.data(), static_cast<Eigen::Index>(n_sv),
                                                    static_cast<Eigen::Index>(dim));
  return m;
}

}  // namespace dupq
