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

#include "dupq/ngram_features.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dupq/common.hpp"

namespace dupq {

namespace {

constexpr const char* kHeader = "dupq-feature-space 1";
constexpr std::uint32_t kUnknown = UINT32_MAX;

std::string next_line(std::string_view& text) {
  const std::size_t nl = text.find('\n');
  std::string line(text.substr(0, nl));
  text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  return line;
}

std::string header_value(std::string_view& text, const std::string& key) {
  const std::string line = next_line(text);
  if (line.rfind(key + " ", 0) != 0) throw DataError("feature space: expected '" + key + "' line");
  return line.substr(key.size() + 1);
}

}  // namespace

void NGramConfig::validate() const {
  if (max_n < 1 || max_n > 3) throw ConfigError("ngram max_n must be in 1..3");
  if (min_count < 1) throw ConfigError("ngram min_count must be >= 1");
}

std::map<NGram, std::uint64_t> extract_ngrams(const TokenSequence& tokens, int n) {
  if (n < 1) throw std::invalid_argument("extract_ngrams: n must be >= 1");
  std::map<NGram, std::uint64_t> out;
  const std::size_t un = static_cast<std::size_t>(n);
  if (tokens.size() < un) return out;
  for (std::size_t i = 0; i + un <= tokens.size(); ++i)
    ++out[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
  return out;
}

std::size_t FeatureSpace::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = k.slot_n * 0x9E3779B97F4A7C15ULL;
  for (std::uint32_t t : k.tok) {
    h ^= t + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

FeatureSpace FeatureSpace::fit(const Dataset& d, const NGramConfig& cfg) {
  cfg.validate();
  // Token ids are provisional until all tokens are known, then remapped to
  // lexicographic rank so that key order equals n-gram order.
  std::unordered_map<std::string, std::uint32_t> prov;
  std::vector<std::string> prov_tokens;
  std::unordered_map<Key, std::uint64_t, KeyHash> counts;
  std::vector<std::uint32_t> ids;

  auto count_question = [&](const std::string& q, int slot) {
    const TokenSequence toks = text::preprocess_tokens(cfg.pipeline, q);
    ids.clear();
    for (const auto& t : toks) {
      auto [it, inserted] = prov.try_emplace(t, static_cast<std::uint32_t>(prov_tokens.size()));
      if (inserted) prov_tokens.push_back(t);
      ids.push_back(it->second);
    }
    for (int n = 1; n <= cfg.max_n; ++n) {
      const std::size_t un = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + un <= ids.size(); ++i) {
        Key k;
        k.slot_n = static_cast<std::uint32_t>(slot * 4 + n);
        for (std::size_t j = 0; j < un; ++j) k.tok[j] = ids[i + j];
        ++counts[k];
      }
    }
  };
  for (const auto& p : d) {
    count_question(p.question1, 1);
    count_question(p.question2, 2);
  }

  std::vector<std::uint32_t> order(prov_tokens.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return prov_tokens[a] < prov_tokens[b]; });
  std::vector<std::uint32_t> rank(prov_tokens.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  FeatureSpace fs;
  fs.cfg_ = cfg;
  fs.tokens_.reserve(order.size());
  for (std::uint32_t id : order) fs.tokens_.push_back(std::move(prov_tokens[id]));
  fs.token_id_.reserve(fs.tokens_.size());
  for (std::uint32_t r = 0; r < fs.tokens_.size(); ++r) fs.token_id_.emplace(fs.tokens_[r], r);

  fs.keys_.reserve(counts.size());
  for (const auto& [k, c] : counts) {
    if (c < cfg.min_count) continue;
    Key remapped = k;
    const std::uint32_t n = k.slot_n % 4;
    for (std::uint32_t j = 0; j < n; ++j) remapped.tok[j] = rank[k.tok[j]];
    fs.keys_.push_back(remapped);
  }
  std::sort(fs.keys_.begin(), fs.keys_.end(), [](const Key& a, const Key& b) {
    if (a.slot_n != b.slot_n) return a.slot_n < b.slot_n;
    return a.tok < b.tok;
  });
  fs.columns_.reserve(fs.keys_.size());
  for (std::uint32_t c = 0; c < fs.keys_.size(); ++c) fs.columns_.emplace(fs.keys_[c], c);
  fs.n_columns_ = fs.keys_.size();
  return fs;
}

std::int64_t FeatureSpace::column(int slot, const NGram& ngram) const {
  if (ngram.empty() || ngram.size() > 3 || (slot != 1 && slot != 2)) return -1;
  Key k;
  k.slot_n = static_cast<std::uint32_t>(slot * 4 + static_cast<int>(ngram.size()));
  for (std::size_t j = 0; j < ngram.size(); ++j) {
    auto it = token_id_.find(ngram[j]);
    if (it == token_id_.end()) return -1;
    k.tok[j] = it->second;
  }
  auto it = columns_.find(k);
  return it == columns_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

FeatureSpace::Column FeatureSpace::column_info(std::size_t col) const {
  const Key& k = keys_.at(col);
  Column c;
  c.slot = static_cast<int>(k.slot_n / 4);
  for (std::uint32_t j = 0; j < k.slot_n % 4; ++j) c.ngram.push_back(tokens_[k.tok[j]]);
  return c;
}

void FeatureSpace::add_windows(const TokenSequence& tokens, int slot,
                               std::vector<std::pair<std::uint32_t, double>>& out) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = token_id_.find(t);
    ids.push_back(it == token_id_.end() ? kUnknown : it->second);
  }
  for (int n = 1; n <= cfg_.max_n; ++n) {
    const std::size_t un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= ids.size(); ++i) {
      Key k;
      k.slot_n = static_cast<std::uint32_t>(slot * 4 + n);
      bool known = true;
      for (std::size_t j = 0; j < un; ++j) {
        if (ids[i + j] == kUnknown) {
          known = false;
          break;
        }
        k.tok[j] = ids[i + j];
      }
      if (!known) continue;
      auto it = columns_.find(k);
      if (it != columns_.end()) out.emplace_back(it->second, 1.0);
    }
  }
}

SparseVector FeatureSpace::vectorize(const TokenSequence& q1, const TokenSequence& q2) const {
  std::vector<std::pair<std::uint32_t, double>> entries;
  add_windows(q1, 1, entries);
  add_windows(q2, 2, entries);
  std::sort(entries.begin(), entries.end());
  SparseVector v;
  for (const auto& [c, x] : entries) {
    if (!v.indices.empty() && v.indices.back() == c) {
      v.values.back() += x;
    } else {
      v.indices.push_back(c);
      v.values.push_back(x);
    }
  }
  return v;
}

SparseVector FeatureSpace::vectorize(const QuestionPair& p) const {
  return vectorize(text::preprocess_tokens(cfg_.pipeline, p.question1),
                   text::preprocess_tokens(cfg_.pipeline, p.question2));
}

SparseMatrix FeatureSpace::vectorize(const Dataset& d) const {
  SparseMatrix m(n_columns_);
  for (const auto& p : d) m.append_row(vectorize(p));
  return m;
}

std::string FeatureSpace::serialize() const {
  std::ostringstream out;
  out << kHeader << "\n";
  out << "max_n " << cfg_.max_n << "\n";
  out << "pipeline " << (cfg_.pipeline.steps.empty() ? "none" : cfg_.pipeline.to_string()) << "\n";
  out << "min_count " << cfg_.min_count << "\n";
  out << "columns " << n_columns_ << "\n";
  for (const Key& k : keys_) {
    out << k.slot_n / 4 << '\t' << k.slot_n % 4 << '\t';
    for (std::uint32_t j = 0; j < k.slot_n % 4; ++j) {
      if (j) out << ' ';
      out << tokens_[k.tok[j]];
    }
    out << '\n';
  }
  return out.str();
}

FeatureSpace FeatureSpace::deserialize(std::string_view text) {
  if (next_line(text) != kHeader) throw DataError("feature space: bad header or version");
  FeatureSpace fs;
  try {
    fs.cfg_.max_n = std::stoi(header_value(text, "max_n"));
    fs.cfg_.pipeline = text::Pipeline::parse(header_value(text, "pipeline"));
    fs.cfg_.min_count = std::stoull(header_value(text, "min_count"));
    fs.n_columns_ = std::stoull(header_value(text, "columns"));
  } catch (const std::logic_error& e) {
    throw DataError(std::string("feature space: bad header value: ") + e.what());
  }
  fs.cfg_.validate();

  std::vector<std::pair<int, NGram>> cols;
  cols.reserve(fs.n_columns_);
  std::set<std::string> vocab;
  while (!text.empty()) {
    const std::string line = next_line(text);
    if (line.empty()) continue;
    std::istringstream ls(line);
    int slot = 0, n = 0;
    ls >> slot >> n;
    NGram g;
    std::string tok;
    while (ls >> tok) g.push_back(tok);
    if ((slot != 1 && slot != 2) || n < 1 || n > fs.cfg_.max_n || static_cast<int>(g.size()) != n)
      throw DataError("feature space: malformed column line '" + line + "'");
    for (const auto& t : g) vocab.insert(t);
    cols.emplace_back(slot, std::move(g));
  }
  if (cols.size() != fs.n_columns_) throw DataError("feature space: column count mismatch");
  fs.tokens_.assign(vocab.begin(), vocab.end());
  for (std::uint32_t r = 0; r < fs.tokens_.size(); ++r) fs.token_id_.emplace(fs.tokens_[r], r);
  for (std::uint32_t c = 0; c < cols.size(); ++c) {
    Key k;
    k.slot_n = static_cast<std::uint32_t>(cols[c].first * 4 + static_cast<int>(cols[c].second.size()));
    for (std::size_t j = 0; j < cols[c].second.size(); ++j) k.tok[j] = fs.token_id_.at(cols[c].second[j]);
    if (!fs.columns_.emplace(k, c).second) throw DataError("feature space: duplicate column");
    fs.keys_.push_back(k);
  }
  return fs;
}

std::uint64_t FeatureSpace::hash() const { return fnv1a(serialize()); }

void FeatureSpace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << serialize();
  if (!out) throw DataError("write failed: " + path);
}

FeatureSpace FeatureSpace::load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace dupq
