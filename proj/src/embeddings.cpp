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

#include "dupq/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace dupq {

namespace {

constexpr std::size_t kMaxArityWarnings = 10;

void check_dims(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
}

}  // namespace

bool EmbeddingTable::add(const std::string& word, std::span<const float> values) {
  if (values.size() != dim_) throw std::invalid_argument("embedding row has wrong dimension");
  auto [it, inserted] = index_.try_emplace(word, words_.size());
  if (!inserted) return false;
  words_.push_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

std::int64_t EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t expected_dim,
                               Warnings* warnings, const std::unordered_set<std::string>* keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file " + path);
  if (expected_dim == 0) throw ConfigError("embedding dimension must be positive");

  EmbeddingTable table(expected_dim);
  Fnv1a hash;
  std::string line;
  std::vector<float> values(expected_dim);
  std::size_t line_no = 0, bad = 0;
  while (std::getline(in, line)) {
    ++line_no;
    hash.update(line);
    if (!in.eof()) hash.update("\n");
    std::string_view rest(line);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    const std::size_t sp = rest.find(' ');
    if (rest.empty()) continue;
    std::string word(rest.substr(0, sp));
    if (keep != nullptr && !keep->contains(word)) continue;

    std::size_t count = 0;
    bool ok = sp != std::string_view::npos;
    const char* p = ok ? rest.data() + sp : rest.data() + rest.size();
    const char* end = rest.data() + rest.size();
    while (ok) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      float x;
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t')) {
        ok = false;
        break;
      }
      if (count < expected_dim) values[count] = x;
      ++count;
      p = next;
    }
    if (!ok || count != expected_dim) {
      if (++bad <= kMaxArityWarnings) {
        warn(warnings, path + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(expected_dim) + " values, found " +
                           (ok ? std::to_string(count) : std::string("unparseable")) + "; skipped");
      }
      continue;
    }
    table.add(word, values);
  }
  if (bad > kMaxArityWarnings)
    warn(warnings, path + ": " + std::to_string(bad) + " malformed lines skipped in total");
  if (table.size() == 0) throw DataError(path + ": no valid embedding rows");
  table.set_source_hash(hash.digest());
  return table;
}

void write_embedding_manifest(const std::string& path, const EmbeddingTable& table,
                              const std::string& source) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "source = " << source << "\n";
  out << "hash = " << hex64(table.source_hash()) << "\n";
  out << "dim = " << table.dim() << "\n";
  out << "rows = " << table.size() << "\n";
}

std::vector<double> oov_vector(const std::string& token, std::size_t dim, double sigma,
                               std::uint64_t seed) {
  Rng rng(fnv1a(token) ^ (seed * 0x9E3779B97F4A7C15ULL));
  std::vector<double> v(dim);
  for (double& x : v) x = sigma * rng.normal();
  return v;
}

SentenceEmbedding embed_sentence(const TokenSequence& tokens, const EmbeddingTable& table,
                                 const OovPolicy& oov) {
  SentenceEmbedding out(table.dim(), 0.0);
  for (const auto& t : tokens) {
    const std::int64_t r = table.find(t);
    if (r >= 0) {
      const auto row = table.row(static_cast<std::size_t>(r));
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += row[k];
    } else if (oov.kind == OovPolicy::Kind::gaussian) {
      const auto v = oov_vector(t, table.dim(), oov.sigma, oov.seed);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
    }
  }
  return out;
}

std::vector<double> pair_concat(std::span<const double> u, std::span<const double> v) {
  check_dims(u, v);
  std::vector<double> out(u.begin(), u.end());
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

DistanceFeatures distance_features(std::span<const double> u, std::span<const double> v) {
  check_dims(u, v);
  if (u.empty()) throw std::invalid_argument("distance_features: empty vectors");
  const std::size_t d = u.size();
  DistanceFeatures f;
  double abs_sum = 0, sq = 0, uv = 0, uu = 0, vv = 0, mu = 0, mv = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = std::abs(u[i] - v[i]);
    f.city_block += diff;
    f.chebyshev = std::max(f.chebyshev, diff);
    sq += diff * diff;
    abs_sum += std::abs(u[i] + v[i]);
    const double denom = std::abs(u[i]) + std::abs(v[i]);
    if (denom > 0) f.canberra += diff / denom;
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    mu += u[i];
    mv += v[i];
  }
  f.euclidean = std::sqrt(sq);
  f.bray_curtis = abs_sum > 0 ? f.city_block / abs_sum : 0.0;
  f.cosine = (uu > 0 && vv > 0) ? 1.0 - uv / (std::sqrt(uu) * std::sqrt(vv)) : 0.0;

  mu /= static_cast<double>(d);
  mv /= static_cast<double>(d);
  double cuv = 0, cuu = 0, cvv = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const double a = u[i] - mu, b = v[i] - mv;
    cuv += a * b;
    cuu += a * a;
    cvv += b * b;
  }
  f.correlation = (cuu > 0 && cvv > 0) ? 1.0 - cuv / (std::sqrt(cuu) * std::sqrt(cvv)) : 0.0;
  // Rounding can push 1 - cos slightly below zero.
  f.cosine = std::max(0.0, f.cosine);
  f.correlation = std::max(0.0, f.correlation);
  return f;
}

}  // namespace dupq
