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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dupq/embeddings.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace dupq {
namespace {

using testing::TempDir;

EmbeddingTable fixture_table(TempDir& tmp, const std::string& body = "a 1.0 2.0\nb 0.0 1.0\n",
                             Warnings* w = nullptr) {
  {
    std::ofstream out(tmp.file("vec.txt"));
    out << body;
  }
  return load_embeddings(tmp.file("vec.txt"), 2, w);
}

TEST(LoadEmbeddings, TwoLineFixture) {
  TempDir tmp("emb");
  const EmbeddingTable t = fixture_table(tmp);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dim(), 2u);
  const auto a = t.row(static_cast<std::size_t>(t.find("a")));
  EXPECT_EQ(a[0], 1.0f);
  EXPECT_EQ(a[1], 2.0f);
  EXPECT_EQ(t.find("zzz"), -1);
}

TEST(LoadEmbeddings, WrongArityLineSkippedWithWarning) {
  TempDir tmp("emb");
  Warnings w;
  const EmbeddingTable t = fixture_table(tmp, "a 1.0 2.0\nc 1 2 3\nb 0.0 1.0\n", &w);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.find("c"), -1);
  EXPECT_FALSE(w.empty());
}

TEST(LoadEmbeddings, KeepSetFiltersRows) {
  TempDir tmp("emb");
  {
    std::ofstream out(tmp.file("vec.txt"));
    out << "a 1 2\nb 0 1\nc 5 5\n";
  }
  const std::unordered_set<std::string> keep = {"c", "a"};
  const EmbeddingTable t = load_embeddings(tmp.file("vec.txt"), 2, nullptr, &keep);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.find("b"), -1);
}

TEST(LoadEmbeddings, SourceHashDependsOnContent) {
  TempDir a("emb_a"), b("emb_b");
  EXPECT_NE(fixture_table(a).source_hash(), fixture_table(b, "a 1.0 2.0\nb 0.0 1.5\n").source_hash());
}

TEST(LoadEmbeddings, MissingFileAndEmptyTable) {
  TempDir tmp("emb");
  EXPECT_THROW(load_embeddings(tmp.file("nope.txt"), 2), DataError);
  EXPECT_THROW(fixture_table(tmp, "a 1\n"), DataError);
}

TEST(EmbedSentence, Sums) {
  TempDir tmp("emb");
  const EmbeddingTable t = fixture_table(tmp);
  EXPECT_EQ(embed_sentence({"a"}, t), (SentenceEmbedding{1.0, 2.0}));
  EXPECT_EQ(embed_sentence({"a", "b"}, t), (SentenceEmbedding{1.0, 3.0}));
  EXPECT_EQ(embed_sentence({}, t), (SentenceEmbedding{0.0, 0.0}));
  EXPECT_EQ(embed_sentence({"zzz"}, t), (SentenceEmbedding{0.0, 0.0}));
}

TEST(EmbedSentence, GaussianOovIsSeededPerToken) {
  TempDir tmp("emb");
  const EmbeddingTable t = fixture_table(tmp);
  const auto policy = OovPolicy::gaussian(0.1, 3);
  const auto x = embed_sentence({"zzz"}, t, policy);
  EXPECT_EQ(x, embed_sentence({"zzz"}, t, policy));
  EXPECT_NE(x, embed_sentence({"yyy"}, t, policy));
  EXPECT_EQ(x, oov_vector("zzz", 2, 0.1, 3));
}

TEST(PairConcat, Layout) {
  EXPECT_EQ(pair_concat(std::vector<double>{1, 2}, std::vector<double>{3, 4}), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(pair_concat(std::vector<double>(50, 0.0), std::vector<double>(50, 1.0)).size(), 100u);
}

TEST(Distances, UnitVectors) {
  const auto d = distance_features(std::vector<double>{1, 0}, std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(d.city_block, 2.0);
  EXPECT_DOUBLE_EQ(d.chebyshev, 1.0);
  EXPECT_DOUBLE_EQ(d.euclidean, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(d.cosine, 1.0);
  EXPECT_DOUBLE_EQ(d.bray_curtis, 1.0);
  EXPECT_DOUBLE_EQ(d.canberra, 2.0);
  EXPECT_DOUBLE_EQ(d.correlation, 2.0);
}

TEST(Distances, IdenticalVectorsAreZero) {
  const std::vector<double> u = {0.3, -1.0, 2.5, 4.0};
  for (double x : distance_features(u, u).as_array()) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(Distances, ZeroVectorConventions) {
  const std::vector<double> z = {0, 0, 0};
  const auto d = distance_features(z, z);
  for (double x : d.as_array()) EXPECT_EQ(x, 0.0);
  const auto c = distance_features(z, std::vector<double>{1, 2, 3});
  EXPECT_EQ(c.cosine, 0.0);
  EXPECT_EQ(c.correlation, 0.0);
}

TEST(Distances, MatchesFrozenScipyValues) {
  std::ifstream in(testing::data_path("distances.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    const auto dim = static_cast<std::size_t>(v[0]);
    ASSERT_EQ(v.size(), 1 + 2 * dim + 7);
    const std::vector<double> u(v.begin() + 1, v.begin() + 1 + static_cast<std::ptrdiff_t>(dim));
    const std::vector<double> w(v.begin() + 1 + static_cast<std::ptrdiff_t>(dim),
                                v.begin() + 1 + 2 * static_cast<std::ptrdiff_t>(dim));
    const auto got = distance_features(u, w).as_array();
    for (std::size_t k = 0; k < 7; ++k)
      EXPECT_NEAR(got[k], v[1 + 2 * dim + k], 1e-9 * std::max(1.0, std::abs(got[k])))
          << "row " << rows << " " << kDistanceNames[k];
    ++rows;
  }
  EXPECT_EQ(rows, 12);
}

class DistanceProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(DistanceProperties, BruteForceAndOrdering) {
  Rng rng(GetParam());
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u(50), v(50);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = trial % 2 ? rng.normal() : std::abs(rng.normal());
    const auto got = distance_features(u, v);
    const auto want = oracle::distances(u, v);
    const auto arr = got.as_array();
    for (std::size_t k = 0; k < 7; ++k)
      EXPECT_NEAR(arr[k], want[k], 1e-9 * std::max(1.0, std::abs(want[k]))) << kDistanceNames[k];
    EXPECT_GE(got.city_block, got.euclidean);
    EXPECT_GE(got.euclidean, got.chebyshev);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, DistanceProperties, ::testing::Range<std::uint64_t>(1, 21));

}  // namespace
}  // namespace dupq
