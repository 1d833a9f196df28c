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

// Forward and backward passes of the building blocks used by the pair models.
// Vectors are columns; a sequence of T vectors of size d is a d x T matrix.
// Backward functions accumulate (+=) into the gradient arguments they are given.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dupq/common.hpp"

namespace dupq::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Softmax with max subtraction.
Vec softmax(const Vec& z);
/// Each row sums to 1.
Mat softmax_rows(const Mat& e);
/// Each column sums to 1.
Mat softmax_cols(const Mat& e);

/// Sum of embedding columns, added in ascending id order so any permutation of `ids`
/// gives a bit-identical result. Empty input gives the zero vector.
Vec cbow_encode(const Mat& embeddings, std::span<const int> ids);

/// Embedding columns for `ids` (d x T).
Mat gather(const Mat& embeddings, std::span<const int> ids);

/// Gate blocks are stacked [input; forget; candidate; output] in Wx (4H x E), Wh (4H x H)
/// and b (4H x 1). Initial hidden and cell states are zero.
struct LSTMCache {
  Mat x;      // E x T inputs
  Mat gates;  // 4H x T activated gates
  Mat c;      // H x T cell states
  Mat h;      // H x T hidden states
};

LSTMCache lstm_forward(const Mat& Wx, const Mat& Wh, const Mat& b, const Mat& x);

/// `dh` holds the loss gradient with respect to every hidden state (H x T).
/// Returns the gradient with respect to the inputs (E x T).
Mat lstm_backward(const Mat& Wx, const Mat& Wh, const LSTMCache& cache, const Mat& dh, Mat& dWx, Mat& dWh,
                  Mat& db);

/// Column order reversed.
Mat reverse_columns(const Mat& m);

/// Dot-product attention between U (d x Lu) and V (d x Lv).
struct AttentionOutput {
  Mat e;            // Lu x Lv, e(i, j) = u_i . v_j
  Mat row_weights;  // softmax over j for each i
  Mat col_weights;  // softmax over i for each j
  Mat u_bar;        // d x Lu, u_bar_i = sum_j row_weights(i, j) v_j
  Mat v_bar;        // d x Lv, v_bar_j = sum_i col_weights(i, j) u_i
};

AttentionOutput attention(const Mat& U, const Mat& V);

void attention_backward(const Mat& U, const Mat& V, const AttentionOutput& a, const Mat& d_u_bar,
                        const Mat& d_v_bar, Mat& dU, Mat& dV);

/// tanh(W a + V b).
Vec combine(const Mat& W, const Mat& V, const Vec& a, const Vec& b);

/// Given out = combine(W, V, a, b) and d_out, accumulates dW, dV, da, db.
void combine_backward(const Mat& W, const Mat& V, const Vec& a, const Vec& b, const Vec& out, const Vec& d_out,
                      Mat& dW, Mat& dV, Vec& da, Vec& db);

/// [u; v; u - v; u * v].
Vec pair_features(const Vec& u, const Vec& v);
void pair_features_backward(const Vec& u, const Vec& v, const Vec& dm, Vec& du, Vec& dv);

/// Stack of tanh layers followed by a linear layer and softmax. Dropout with inverted
/// scaling is applied to the input of every layer when `rng` is non-null.
struct MLPCache {
  std::vector<Vec> inputs;  // input to each layer after dropout
  std::vector<Vec> masks;   // scaled dropout masks; empty when dropout is off
  std::vector<Vec> hidden;  // tanh outputs of the hidden layers
  Vec probs;
};

Vec mlp_forward(const std::vector<const Mat*>& W, const std::vector<const Mat*>& b, const Vec& m, double dropout,
                Rng* rng, MLPCache& cache);

/// `d_logits` is the gradient at the pre-softmax output. Returns the gradient at `m`.
Vec mlp_backward(const std::vector<const Mat*>& W, const MLPCache& cache, const Vec& d_logits,
                 const std::vector<Mat*>& dW, const std::vector<Mat*>& db);

}  // namespace dupq::nn
