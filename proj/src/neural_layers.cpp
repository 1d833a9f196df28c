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

#include "dupq/neural_layers.hpp"

#include <algorithm>
#include <cmath>

namespace dupq::nn {

namespace {

Vec logistic(const Vec& z) {
  return z.unaryExpr([](double t) { return sigmoid(t); });
}

}  // namespace

Vec softmax(const Vec& z) {
  const Vec ez = (z.array() - z.maxCoeff()).exp().matrix();
  return ez / ez.sum();
}

Mat softmax_rows(const Mat& e) {
  Mat out(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) out.row(i) = softmax(e.row(i).transpose()).transpose();
  return out;
}

Mat softmax_cols(const Mat& e) {
  Mat out(e.rows(), e.cols());
  for (Eigen::Index j = 0; j < e.cols(); ++j) out.col(j) = softmax(e.col(j));
  return out;
}

Vec cbow_encode(const Mat& embeddings, std::span<const int> ids) {
  std::vector<int> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  Vec s = Vec::Zero(embeddings.rows());
  for (int id : sorted) s += embeddings.col(id);
  return s;
}

Mat gather(const Mat& embeddings, std::span<const int> ids) {
  Mat x(embeddings.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t t = 0; t < ids.size(); ++t) x.col(static_cast<Eigen::Index>(t)) = embeddings.col(ids[t]);
  return x;
}

LSTMCache lstm_forward(const Mat& Wx, const Mat& Wh, const Mat& b, const Mat& x) {
  const Eigen::Index H = Wh.cols(), T = x.cols();
  LSTMCache cache;
  cache.x = x;
  cache.gates.resize(4 * H, T);
  cache.c.resize(H, T);
  cache.h.resize(H, T);
  // Input projections for all steps at once.
  const Mat proj = (Wx * x).colwise() + b.col(0);
  Vec h_prev = Vec::Zero(H), c_prev = Vec::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vec a = proj.col(t) + Wh * h_prev;
    const Vec i = logistic(a.segment(0, H));
    const Vec f = logistic(a.segment(H, H));
    const Vec g = a.segment(2 * H, H).array().tanh().matrix();
    const Vec o = logistic(a.segment(3 * H, H));
    const Vec c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    const Vec h = o.cwiseProduct(c.array().tanh().matrix());
    cache.gates.col(t) << i, f, g, o;
    cache.c.col(t) = c;
    cache.h.col(t) = h;
    h_prev = h;
    c_prev = c;
  }
  return cache;
}

Mat lstm_backward(const Mat& Wx, const Mat& Wh, const LSTMCache& cache, const Mat& dh, Mat& dWx, Mat& dWh,
                  Mat& db) {
  const Eigen::Index H = Wh.cols(), T = cache.x.cols();
  Mat da(4 * H, T);
  Vec dh_next = Vec::Zero(H), dc_next = Vec::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto gates = cache.gates.col(t);
    const Vec i = gates.segment(0, H), f = gates.segment(H, H), g = gates.segment(2 * H, H),
              o = gates.segment(3 * H, H);
    const Vec c_prev = t > 0 ? Vec(cache.c.col(t - 1)) : Vec::Zero(H);
    const Vec tc = cache.c.col(t).array().tanh().matrix();
    const Vec dht = dh.col(t) + dh_next;
    const Vec d_o = dht.cwiseProduct(tc);
    const Vec dc = dht.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
    const Vec d_i = dc.cwiseProduct(g);
    const Vec d_g = dc.cwiseProduct(i);
    const Vec d_f = dc.cwiseProduct(c_prev);
    dc_next = dc.cwiseProduct(f);
    auto col = da.col(t);
    col.segment(0, H) = d_i.array() * i.array() * (1.0 - i.array());
    col.segment(H, H) = d_f.array() * f.array() * (1.0 - f.array());
    col.segment(2 * H, H) = d_g.array() * (1.0 - g.array().square());
    col.segment(3 * H, H) = d_o.array() * o.array() * (1.0 - o.array());
    dh_next = Wh.transpose() * col;
  }
  dWx.noalias() += da * cache.x.transpose();
  if (T > 1) dWh.noalias() += da.rightCols(T - 1) * cache.h.leftCols(T - 1).transpose();
  db.col(0) += da.rowwise().sum();
  return Wx.transpose() * da;
}

Mat reverse_columns(const Mat& m) { return m.rowwise().reverse(); }

AttentionOutput attention(const Mat& U, const Mat& V) {
  AttentionOutput a;
  a.e = U.transpose() * V;
  a.row_weights = softmax_rows(a.e);
  a.col_weights = softmax_cols(a.e);
  a.u_bar = V * a.row_weights.transpose();
  a.v_bar = U * a.col_weights;
  return a;
}

void attention_backward(const Mat& U, const Mat& V, const AttentionOutput& a, const Mat& d_u_bar,
                        const Mat& d_v_bar, Mat& dU, Mat& dV) {
  const Mat& A = a.row_weights;
  const Mat& B = a.col_weights;
  dV.noalias() += d_u_bar * A;
  dU.noalias() += d_v_bar * B.transpose();
  const Mat dA = d_u_bar.transpose() * V;
  const Mat dB = U.transpose() * d_v_bar;
  // Softmax Jacobians: row-wise for A, column-wise for B.
  const Vec row_dot = A.cwiseProduct(dA).rowwise().sum();
  const Eigen::RowVectorXd col_dot = B.cwiseProduct(dB).colwise().sum();
  const Mat dE = A.cwiseProduct(dA.colwise() - row_dot) + B.cwiseProduct(dB.rowwise() - col_dot);
  dU.noalias() += V * dE.transpose();
  dV.noalias() += U * dE;
}

Vec combine(const Mat& W, const Mat& V, const Vec& a, const Vec& b) {
  return (W * a + V * b).array().tanh().matrix();
}

void combine_backward(const Mat& W, const Mat& V, const Vec& a, const Vec& b, const Vec& out, const Vec& d_out,
                      Mat& dW, Mat& dV, Vec& da, Vec& db) {
  const Vec dz = d_out.cwiseProduct((1.0 - out.array().square()).matrix());
  dW.noalias() += dz * a.transpose();
  dV.noalias() += dz * b.transpose();
  da.noalias() += W.transpose() * dz;
  db.noalias() += V.transpose() * dz;
}

Vec pair_features(const Vec& u, const Vec& v) {
  Vec m(4 * u.size());
  m << u, v, u - v, u.cwiseProduct(v);
  return m;
}

void pair_features_backward(const Vec& u, const Vec& v, const Vec& dm, Vec& du, Vec& dv) {
  const Eigen::Index d = u.size();
  const auto g1 = dm.segment(0, d), g2 = dm.segment(d, d), g3 = dm.segment(2 * d, d), g4 = dm.segment(3 * d, d);
  du += g1 + g3 + g4.cwiseProduct(v);
  dv += g2 - g3 + g4.cwiseProduct(u);
}

Vec mlp_forward(const std::vector<const Mat*>& W, const std::vector<const Mat*>& b, const Vec& m, double dropout,
                Rng* rng, MLPCache& cache) {
  const std::size_t L = W.size();
  cache.inputs.assign(L, Vec());
  cache.masks.assign(rng != nullptr && dropout > 0 ? L : 0, Vec());
  cache.hidden.assign(L - 1, Vec());
  Vec x = m;
  for (std::size_t k = 0; k < L; ++k) {
    if (!cache.masks.empty()) {
      Vec mask(x.size());
      const double keep = 1.0 - dropout;
      for (Eigen::Index j = 0; j < x.size(); ++j) mask(j) = rng->uniform01() < keep ? 1.0 / keep : 0.0;
      x = x.cwiseProduct(mask);
      cache.masks[k] = std::move(mask);
    }
    cache.inputs[k] = x;
    const Vec z = *W[k] * x + b[k]->col(0);
    if (k + 1 < L) {
      cache.hidden[k] = z.array().tanh().matrix();
      x = cache.hidden[k];
    } else {
      cache.probs = softmax(z);
    }
  }
  return cache.probs;
}

Vec mlp_backward(const std::vector<const Mat*>& W, const MLPCache& cache, const Vec& d_logits,
                 const std::vector<Mat*>& dW, const std::vector<Mat*>& db) {
  Vec dz = d_logits;
  for (std::size_t k = W.size(); k-- > 0;) {
    dW[k]->noalias() += dz * cache.inputs[k].transpose();
    db[k]->col(0) += dz;
    Vec dx = W[k]->transpose() * dz;
    if (!cache.masks.empty()) dx = dx.cwiseProduct(cache.masks[k]);
    if (k == 0) return dx;
    dz = dx.cwiseProduct((1.0 - cache.hidden[k - 1].array().square()).matrix());
  }
  return dz;
}

}  // namespace dupq::nn
