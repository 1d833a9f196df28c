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

#include "dupq/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "dupq/csv.hpp"

namespace dupq {

namespace {

constexpr std::array<const char*, 6> kColumns = {"id",        "qid1",      "qid2",
                                                 "question1", "question2", "is_duplicate"};

bool parse_int(const std::string& s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

bool has_nonascii(std::string_view s) {
  for (unsigned char c : s)
    if (c > 127) return true;
  return false;
}

void check_ratios(const SplitRatios& r) {
  for (double x : r.as_array())
    if (!(x >= 0.0)) throw ConfigError("split ratios must be non-negative");
  const double sum = r.train + r.validation + r.test;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (r.train <= 0.0 && r.validation <= 0.0 && r.test <= 0.0)
    throw ConfigError("at least one split ratio must be positive");
}

std::size_t floor_share(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

// round(a * b / c) with ties away from zero, exact in integers.
std::size_t round_ratio(std::size_t a, std::size_t b, std::size_t c) {
  if (c == 0) return 0;
  const unsigned __int128 num = static_cast<unsigned __int128>(a) * b * 2 + c;
  return static_cast<std::size_t>(num / (static_cast<unsigned __int128>(c) * 2));
}

// Gathers pairs by part assignment, keeping input order inside each part.
void materialize(const Dataset& d, const std::vector<int>& part_of, SplitResult& out) {
  std::array<Dataset*, 3> parts = {&out.train, &out.validation, &out.test};
  std::array<std::size_t, 3> counts{};
  for (int p : part_of) ++counts[p];
  for (int i = 0; i < 3; ++i) parts[i]->reserve(counts[i]);
  for (std::size_t i = 0; i < d.size(); ++i) parts[part_of[i]]->push_back(d[i]);
}

// Union-find with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

std::vector<int> labels_of(const Dataset& d) {
  std::vector<int> y;
  y.reserve(d.size());
  for (const auto& p : d) y.push_back(p.label);
  return y;
}

Dataset parse_pairs(std::string_view text, bool strict, Warnings* warnings,
                    const std::string& source) {
  // A UTF-8 byte-order mark is tolerated.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  csv::Reader reader(text);
  csv::Record rec;
  if (!reader.next(rec)) throw DataError(source + ": missing header row");
  std::array<int, 6> col{};
  col.fill(-1);
  for (std::size_t i = 0; i < rec.fields.size(); ++i) {
    for (std::size_t k = 0; k < kColumns.size(); ++k)
      if (rec.fields[i] == kColumns[k]) col[k] = static_cast<int>(i);
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k)
    if (col[k] < 0) throw DataError(source + ": missing column '" + kColumns[k] + "'");
  const std::size_t width = rec.fields.size();

  Dataset out;
  std::unordered_set<std::int64_t> seen_ids;
  std::size_t row = 0;
  while (reader.next(rec)) {
    ++row;
    std::string problem = rec.error;
    QuestionPair p;
    if (problem.empty() && rec.fields.size() != width) {
      problem = "expected " + std::to_string(width) + " fields, found " +
                std::to_string(rec.fields.size());
    }
    if (problem.empty()) {
      std::int64_t label = -1;
      if (!parse_int(rec.fields[col[0]], p.pair_id) || !parse_int(rec.fields[col[1]], p.qid1) ||
          !parse_int(rec.fields[col[2]], p.qid2)) {
        problem = "non-integer id field";
      } else if (!parse_int(rec.fields[col[5]], label) || (label != 0 && label != 1)) {
        problem = "is_duplicate must be 0 or 1";
      } else if (!seen_ids.insert(p.pair_id).second) {
        problem = "duplicate pair id " + std::to_string(p.pair_id);
      } else {
        p.label = static_cast<int>(label);
        p.question1 = std::move(rec.fields[col[3]]);
        p.question2 = std::move(rec.fields[col[4]]);
      }
    }
    if (!problem.empty()) {
      std::string msg = source + ": row " + std::to_string(row) + " (line " +
                        std::to_string(rec.line) + "): " + problem;
      if (strict) throw DataError(msg);
      warn(warnings, msg + "; skipped");
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Dataset load_pairs(const std::string& path, bool strict, Warnings* warnings) {
  const std::string text = read_file(path);
  return parse_pairs(text, strict, warnings, path);
}

void write_pairs(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  csv::write_row(out, {kColumns.begin(), kColumns.end()});
  for (const auto& p : d) {
    csv::write_row(out, {std::to_string(p.pair_id), std::to_string(p.qid1),
                         std::to_string(p.qid2), p.question1, p.question2,
                         std::to_string(p.label)});
  }
  if (!out) throw DataError("write failed: " + path);
}

DatasetStats compute_stats(const Dataset& d, QuestionIdentity identity) {
  DatasetStats s;
  s.n_pairs = d.size();
  std::unordered_map<std::string_view, std::uint64_t> by_text;
  std::unordered_map<std::int64_t, std::uint64_t> by_qid;
  std::unordered_set<std::string_view> nonascii;
  for (const auto& p : d) {
    (p.label == 1 ? s.n_positive : s.n_negative) += 1;
    if (identity == QuestionIdentity::text) {
      ++by_text[p.question1];
      ++by_text[p.question2];
    } else {
      ++by_qid[p.qid1];
      ++by_qid[p.qid2];
    }
    const bool na1 = has_nonascii(p.question1);
    const bool na2 = has_nonascii(p.question2);
    if (na1) nonascii.insert(p.question1);
    if (na2) nonascii.insert(p.question2);
    if (na1 || na2) ++s.n_pairs_with_nonascii;
    if (p.question1.empty() || p.question2.empty()) ++s.n_pairs_with_empty_question;
  }
  auto tally = [&s](std::uint64_t count) {
    ++s.n_unique_questions;
    if (count > 1) ++s.n_multi_occurrence_questions;
    s.max_question_occurrence = std::max(s.max_question_occurrence, count);
    ++s.occurrence_histogram[count];
  };
  for (const auto& [_, c] : by_text) tally(c);
  for (const auto& [_, c] : by_qid) tally(c);
  s.n_nonascii_questions = nonascii.size();
  return s;
}

const char* to_string(SplitKind kind) {
  return kind == SplitKind::blind ? "blind" : "disjoint";
}

SplitKind parse_split_kind(const std::string& s) {
  if (s == "blind") return SplitKind::blind;
  if (s == "disjoint") return SplitKind::disjoint;
  throw ConfigError("unknown split kind '" + s + "' (expected blind or disjoint)");
}

const Dataset& SplitResult::part(int i) const {
  switch (i) {
    case 0: return train;
    case 1: return validation;
    case 2: return test;
  }
  throw std::out_of_range("split part index");
}

SplitResult blind_split(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed) {
  check_ratios(ratios);
  const std::size_t n = d.size();
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (d[i].label == 1 ? pos : neg).push_back(i);

  const std::size_t n_valid = floor_share(n, ratios.validation);
  const std::size_t n_test = floor_share(n, ratios.test);

  // Each nonzero part needs at least one member of each class.
  const auto r = ratios.as_array();
  const std::size_t nonzero_parts = std::count_if(r.begin(), r.end(), [](double x) { return x > 0; });
  if (n > 0 && pos.size() < nonzero_parts)
    throw DataError("blind split: too few positive pairs (" + std::to_string(pos.size()) +
                    ") to fill " + std::to_string(nonzero_parts) + " parts");
  if (n > 0 && neg.size() < nonzero_parts)
    throw DataError("blind split: too few negative pairs (" + std::to_string(neg.size()) +
                    ") to fill " + std::to_string(nonzero_parts) + " parts");

  std::size_t pos_valid = std::min(round_ratio(n_valid, pos.size(), n), pos.size());
  std::size_t pos_test = std::min(round_ratio(n_test, pos.size(), n), pos.size() - pos_valid);
  // Keep negatives feasible when rounding pushed too many positives out.
  if (n_valid - pos_valid > neg.size()) pos_valid = n_valid - neg.size();
  if (n_test - pos_test > neg.size() - (n_valid - pos_valid))
    pos_test = n_test - (neg.size() - (n_valid - pos_valid));
  const std::size_t neg_valid = n_valid - pos_valid;
  const std::size_t neg_test = n_test - pos_test;

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<int> part_of(n, 0);
  auto assign = [&part_of](const std::vector<std::size_t>& idx, std::size_t n_v, std::size_t n_t) {
    for (std::size_t k = 0; k < n_v; ++k) part_of[idx[k]] = 1;
    for (std::size_t k = n_v; k < n_v + n_t; ++k) part_of[idx[k]] = 2;
  };
  assign(pos, pos_valid, pos_test);
  assign(neg, neg_valid, neg_test);

  SplitResult out;
  out.kind = SplitKind::blind;
  out.seed = seed;
  out.ratios = ratios;
  materialize(d, part_of, out);
  return out;
}

SplitResult disjoint_split(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed) {
  check_ratios(ratios);
  const std::size_t n = d.size();

  // Question graph: nodes are distinct texts, edges are pairs.
  std::unordered_map<std::string_view, std::uint32_t> node_of;
  node_of.reserve(2 * n);
  auto node = [&node_of](std::string_view q) {
    auto [it, inserted] = node_of.try_emplace(q, static_cast<std::uint32_t>(node_of.size()));
    return it->second;
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(n);
  for (std::size_t i = 0; i < n; ++i) edges[i] = {node(d[i].question1), node(d[i].question2)};
  DisjointSets sets(node_of.size());
  for (auto [a, b] : edges) sets.unite(a, b);

  struct Component {
    std::vector<std::size_t> pairs;
    std::size_t positives = 0;
  };
  // Components in order of first appearance.
  std::unordered_map<std::uint32_t, std::size_t> comp_index;
  std::vector<Component> comps;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t root = sets.find(edges[i].first);
    auto [it, inserted] = comp_index.try_emplace(root, comps.size());
    if (inserted) comps.emplace_back();
    Component& c = comps[it->second];
    c.pairs.push_back(i);
    c.positives += d[i].label == 1;
  }

  Rng rng(seed);
  std::vector<std::size_t> order(comps.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&comps](std::size_t a, std::size_t b) {
    return comps[a].pairs.size() > comps[b].pairs.size();
  });

  std::size_t total_pos = 0;
  for (const auto& p : d) total_pos += p.label == 1;
  const auto r = ratios.as_array();
  const double n_d = std::max<double>(1.0, static_cast<double>(n));
  const double p_d = std::max<double>(1.0, static_cast<double>(total_pos));

  SplitResult out;
  out.kind = SplitKind::disjoint;
  out.seed = seed;
  out.ratios = ratios;

  std::array<double, 3> size{}, pos{};
  std::vector<int> part_of(n, 0);
  for (std::size_t ci : order) {
    const Component& c = comps[ci];
    const double s = static_cast<double>(c.pairs.size());
    const double q = static_cast<double>(c.positives);
    if (s > r[0] * static_cast<double>(n) && r[0] < 1.0) {
      warn(&out.warnings, "disjoint split: component of " + std::to_string(c.pairs.size()) +
                              " pairs exceeds the train target; ratios will not be met");
    }
    int best = -1;
    double best_cost = 0.0;
    for (int p = 0; p < 3; ++p) {
      if (r[p] <= 0.0) continue;
      const double ts = r[p] * static_cast<double>(n);
      const double tp = r[p] * static_cast<double>(total_pos);
      const double ds = ((size[p] + s - ts) * (size[p] + s - ts) - (size[p] - ts) * (size[p] - ts)) /
                        (n_d * n_d);
      const double dp = ((pos[p] + q - tp) * (pos[p] + q - tp) - (pos[p] - tp) * (pos[p] - tp)) /
                        (p_d * p_d);
      const double cost = ds + dp;
      if (best < 0 || cost < best_cost) {
        best = p;
        best_cost = cost;
      }
    }
    size[best] += s;
    pos[best] += q;
    for (std::size_t i : c.pairs) part_of[i] = best;
  }
  materialize(d, part_of, out);
  return out;
}

std::size_t question_overlap(const Dataset& a, const Dataset& b) {
  std::unordered_set<std::string_view> qa;
  for (const auto& p : a) {
    qa.insert(p.question1);
    qa.insert(p.question2);
  }
  std::unordered_set<std::string_view> shared;
  for (const auto& p : b) {
    if (qa.contains(p.question1)) shared.insert(p.question1);
    if (qa.contains(p.question2)) shared.insert(p.question2);
  }
  return shared.size();
}

void write_split(const std::string& dir, const SplitResult& split) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::array<const char*, 3> names = {"train.csv", "valid.csv", "test.csv"};
  for (int i = 0; i < 3; ++i) write_pairs((fs::path(dir) / names[i]).string(), split.part(i));

  std::ofstream m(fs::path(dir) / "manifest.txt", std::ios::binary);
  if (!m) throw DataError("cannot write manifest in " + dir);
  const std::size_t total = split.train.size() + split.validation.size() + split.test.size();
  m << "kind = " << to_string(split.kind) << "\n";
  m << "seed = " << split.seed << "\n";
  m << std::setprecision(12);
  m << "ratios = " << split.ratios.train << "," << split.ratios.validation << ","
    << split.ratios.test << "\n";
  m << "sizes = " << split.train.size() << "," << split.validation.size() << ","
    << split.test.size() << "\n";
  m << std::fixed << std::setprecision(6);
  m << "achieved_ratios = ";
  for (int i = 0; i < 3; ++i) {
    if (i) m << ",";
    m << (total ? static_cast<double>(split.part(i).size()) / static_cast<double>(total) : 0.0);
  }
  m << "\npositive_fractions = ";
  for (int i = 0; i < 3; ++i) {
    const Dataset& part = split.part(i);
    std::size_t pos = 0;
    for (const auto& p : part) pos += p.label == 1;
    if (i) m << ",";
    m << (part.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(part.size()));
  }
  m << "\n";
  if (split.kind == SplitKind::disjoint) {
    const std::size_t overlap = question_overlap(split.train, split.validation) +
                                question_overlap(split.train, split.test) +
                                question_overlap(split.validation, split.test);
    m << "shared_questions = " << overlap << "\n";
    m << "disjoint = " << (overlap == 0 ? "true" : "false") << "\n";
  }
  m << "warnings = " << split.warnings.size() << "\n";
}

}  // namespace dupq
