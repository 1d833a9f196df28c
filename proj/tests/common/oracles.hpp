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

// Reference implementations written straight from the definitions. Shared by the
// unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "dupq/dense.hpp"
#include "dupq/ngram_features.hpp"
#include "dupq/tree_models.hpp"

namespace dupq::oracle {

using NGramCounts = std::map<std::pair<int, NGram>, double>;

/// Every n-gram window of orders 1..max_n, keyed by (slot, n-gram).
inline NGramCounts ngram_counts(const TokenSequence& t, int slot, int max_n) {
  NGramCounts out;
  for (int n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= t.size(); ++i) {
      const auto first = t.begin() + static_cast<std::ptrdiff_t>(i);
      out[{slot, NGram(first, first + n)}] += 1;
    }
  }
  return out;
}

/// Bray-Curtis, Canberra, Chebyshev, city block, correlation, cosine, Euclidean.
/// Zero denominators give 0.
inline std::array<double, 7> distances(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t n = u.size();
  double num = 0, den = 0, can = 0, cheb = 0, city = 0, uv = 0, uu = 0, vv = 0, sq = 0;
  double mu = 0, mv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += u[i] / static_cast<double>(n);
    mv += v[i] / static_cast<double>(n);
  }
  double cuv = 0, cuu = 0, cvv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = std::abs(u[i] - v[i]);
    num += diff;
    den += std::abs(u[i] + v[i]);
    if (std::abs(u[i]) + std::abs(v[i]) > 0) can += diff / (std::abs(u[i]) + std::abs(v[i]));
    cheb = std::max(cheb, diff);
    city += diff;
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    sq += diff * diff;
    cuv += (u[i] - mu) * (v[i] - mv);
    cuu += (u[i] - mu) * (u[i] - mu);
    cvv += (v[i] - mv) * (v[i] - mv);
  }
  return {den > 0 ? num / den : 0.0,
          can,
          cheb,
          city,
          cuu > 0 && cvv > 0 ? 1.0 - cuv / std::sqrt(cuu * cvv) : 0.0,
          uu > 0 && vv > 0 ? 1.0 - uv / std::sqrt(uu * vv) : 0.0,
          std::sqrt(sq)};
}

/// Brute-force CART for unit weights and integer-valued features: enumerate every
/// (feature, threshold), score children by exact rational Gini, keep the first strict
/// improvement (lowest feature, then lowest threshold). Nodes are numbered in preorder.
class Cart {
 public:
  Cart(const DenseMatrix& X, const std::vector<int>& y, int max_depth, int min_leaf)
      : X_(X), y_(y), max_depth_(max_depth), min_leaf_(min_leaf) {}

  Tree build() {
    std::vector<int> all(y_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    Tree t;
    grow(t, all, 0);
    return t;
  }

 private:
  // Sum over children of (pos^2 + neg^2) / n as num / den.
  struct Frac {
    std::int64_t num, den;
    bool operator>(const Frac& o) const { return num * o.den > o.num * den; }
  };

  static Frac children_score(std::int64_t nl, std::int64_t pl, std::int64_t nr, std::int64_t pr) {
    const std::int64_t a = pl * pl + (nl - pl) * (nl - pl), b = pr * pr + (nr - pr) * (nr - pr);
    return {a * nr + b * nl, nl * nr};
  }

  std::int32_t grow(Tree& t, const std::vector<int>& rows, int depth) {
    const auto id = static_cast<std::int32_t>(t.nodes.size());
    t.nodes.push_back(TreeNode{});
    const auto n = static_cast<std::int64_t>(rows.size());
    std::int64_t p = 0;
    for (int r : rows) p += y_[static_cast<std::size_t>(r)];
    t.nodes.back().weight = static_cast<double>(n);

    int best_f = -1;
    double best_t = 0.0;
    Frac best{0, 1};
    if (depth < max_depth_ && n >= 2 * min_leaf_ && p != 0 && p != n) {
      for (int j = 0; j < X_.cols(); ++j) {
        std::vector<double> values;
        for (int r : rows) values.push_back(X_(r, j));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
          const double thr = (values[k] + values[k + 1]) / 2;
          std::int64_t nl = 0, pl = 0;
          for (int r : rows) {
            if (X_(r, j) <= thr) {
              ++nl;
              pl += y_[static_cast<std::size_t>(r)];
            }
          }
          if (nl < min_leaf_ || n - nl < min_leaf_) continue;
          const Frac s = children_score(nl, pl, n - nl, p - pl);
          if (best_f < 0 || s > best) {
            best_f = j;
            best_t = thr;
            best = s;
          }
        }
      }
    }
    if (best_f < 0) {
      t.nodes[static_cast<std::size_t>(id)].value = static_cast<double>(p) / static_cast<double>(n);
      return id;
    }
    std::vector<int> left, right;
    for (int r : rows) (X_(r, best_f) <= best_t ? left : right).push_back(r);
    t.nodes[static_cast<std::size_t>(id)].feature = best_f;
    t.nodes[static_cast<std::size_t>(id)].threshold = best_t;
    const std::int32_t l = grow(t, left, depth + 1);
    const std::int32_t r = grow(t, right, depth + 1);
    t.nodes[static_cast<std::size_t>(id)].left = l;
    t.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const DenseMatrix& X_;
  const std::vector<int>& y_;
  int max_depth_;
  std::int64_t min_leaf_;
};

}  // namespace dupq::oracle
