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

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "dupq/corpus.hpp"
#include "test_support.hpp"

namespace dupq {
namespace {

using testing::data_path;
using testing::TempDir;

struct Row {
  std::int64_t id, qid1, qid2;
  const char* q1;
  const char* q2;
  int label;
};

// Read off tests/data/pairs20.csv by hand.
const Row kFixture[] = {
    {0, 1, 2, "What is the best way to learn Python?", "How should a beginner start learning Python?", 1},
    {1, 3, 4, "Why is the sky blue?", "What makes the sky look blue during the day?", 1},
    {2, 5, 6, "How do I lose weight fast?", "What is the capital of Australia?", 0},
    {3, 7, 8, "What's the difference between a virus and bacteria?", "How are viruses different from bacteria?", 1},
    {4, 9, 10, "Is it safe to travel to Paris in 2017?", "Is Paris safe for tourists in 2017?", 1},
    {5, 11, 12, "How can I improve my English speaking skills?", "How can I improve my English writing skills?", 0},
    {6, 13, 14, "Which is better, iPhone or Android?", "Why do people not like Android phones?", 0},
    {7, 15, 16, "What would happen if the Moon disappeared?", "What happens if the moon suddenly vanished?", 1},
    {8, 17, 18, "How do I get a job at Google?", "How do I prepare for a Google interview?", 0},
    {9, 19, 20, "Why can't I sleep at night?", "What causes insomnia?", 1},
    {10, 21, 22, "What are the best books on machine learning?", "Which machine learning books should I read first?", 1},
    {11, 23, 24, "How does a bitcoin wallet work?", "", 0},
    {12, 25, 26, "Is 7 a lucky number?", "Why do people think 13 is unlucky?", 0},
    {13, 27, 28, "Who will win the 2016 election, Trump or Clinton?", "Will Hillary Clinton win the election in 2016?", 1},
    {14, 29, 30, "How do I stop being lazy?", "How can I stop procrastinating and being lazy?", 1},
    {15, 31, 32, "What is \xE2\x80\x9C" "dark matter\xE2\x80\x9D made of?", "What is dark energy?", 0},
    {16, 33, 34, "I'm not able to log in to my Gmail account, what should I do?", "Can't log into Gmail. How do I fix it?", 1},
    {17, 35, 36, "Is Java harder than C++?", "Should I learn C++ or Java first?", 0},
    {18, 1, 37, "What is the best way to learn Python?", "What are good resources for learning Python in 3 months?", 1},
    {19, 38, 39, "How much does a caf\xC3\xA9 in S\xC3\xA3o Paulo earn \xE2\x80\x94 per month?",
     "How profitable is a coffee shop in Brazil?", 0},
};

Dataset fixture() { return load_pairs(data_path("pairs20.csv"), true); }

std::set<std::string> texts(const Dataset& d) {
  std::set<std::string> s;
  for (const auto& p : d) {
    s.insert(p.question1);
    s.insert(p.question2);
  }
  return s;
}

TEST(LoadPairs, FixtureMatchesTranscription) {
  const Dataset d = fixture();
  ASSERT_EQ(d.size(), std::size(kFixture));
  for (std::size_t i = 0; i < d.size(); ++i) {
    SCOPED_TRACE(i);
    EXPECT_EQ(d[i].pair_id, kFixture[i].id);
    EXPECT_EQ(d[i].qid1, kFixture[i].qid1);
    EXPECT_EQ(d[i].qid2, kFixture[i].qid2);
    EXPECT_EQ(d[i].question1, kFixture[i].q1);
    EXPECT_EQ(d[i].question2, kFixture[i].q2);
    EXPECT_EQ(d[i].label, kFixture[i].label);
  }
}

TEST(LoadPairs, HeaderOnlyGivesEmptyDataset) {
  EXPECT_TRUE(parse_pairs("id,qid1,qid2,question1,question2,is_duplicate\n", true).empty());
}

TEST(LoadPairs, ColumnOrderIsFreeAndExtraColumnsIgnored) {
  const Dataset d = parse_pairs("is_duplicate,question2,note,question1,qid2,qid1,id\n1,b,x,a,4,3,9\n", true);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].pair_id, 9);
  EXPECT_EQ(d[0].qid1, 3);
  EXPECT_EQ(d[0].question1, "a");
  EXPECT_EQ(d[0].question2, "b");
  EXPECT_EQ(d[0].label, 1);
}

TEST(LoadPairs, QuotedFieldsKeepCommasQuotesAndNewlines) {
  const Dataset d = parse_pairs(
      "id,qid1,qid2,question1,question2,is_duplicate\n"
      "0,1,2,\"a, b\",\"say \"\"hi\"\"\nthere\",0\n",
      true);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].question1, "a, b");
  EXPECT_EQ(d[0].question2, "say \"hi\"\nthere");
}

TEST(LoadPairs, MalformedRowSkippedWithWarning) {
  const std::string text =
      "id,qid1,qid2,question1,question2,is_duplicate\n"
      "0,1,2,a,b,0\n"
      "1,3,4,c,d,7\n"
      "2,5,6,e\n"
      "3,7,8,g,h,1\n";
  Warnings w;
  const Dataset d = parse_pairs(text, false, &w);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].pair_id, 3);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NE(w[0].find("row 2"), std::string::npos);
  EXPECT_NE(w[1].find("row 3"), std::string::npos);
}

TEST(LoadPairs, StrictModeAbortsWithRowNumber) {
  const std::string text =
      "id,qid1,qid2,question1,question2,is_duplicate\n"
      "0,1,2,a,b,0\n"
      "x,3,4,c,d,1\n";
  try {
    parse_pairs(text, true);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(LoadPairs, MissingColumnAborts) {
  EXPECT_THROW(parse_pairs("id,qid1,qid2,question1,is_duplicate\n0,1,2,a,1\n", false), DataError);
}

TEST(LoadPairs, MissingFileIsDataError) {
  EXPECT_THROW(load_pairs(data_path("does_not_exist.csv"), false), DataError);
}

TEST(LoadPairs, WriteThenLoadRoundTrips) {
  TempDir tmp("corpus");
  const Dataset d = fixture();
  write_pairs(tmp.file("out.csv"), d);
  const Dataset back = load_pairs(tmp.file("out.csv"), true);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].question1, d[i].question1);
    EXPECT_EQ(back[i].question2, d[i].question2);
    EXPECT_EQ(back[i].label, d[i].label);
    EXPECT_EQ(back[i].qid2, d[i].qid2);
  }
}

TEST(ComputeStats, FixtureHandCounts) {
  const DatasetStats s = compute_stats(fixture());
  EXPECT_EQ(s.n_pairs, 20u);
  EXPECT_EQ(s.n_negative, 9u);
  EXPECT_EQ(s.n_positive, 11u);
  // 40 question slots; pair 18 repeats the first question of pair 0.
  EXPECT_EQ(s.n_unique_questions, 39u);
  EXPECT_EQ(s.n_multi_occurrence_questions, 1u);
  EXPECT_EQ(s.max_question_occurrence, 2u);
  EXPECT_EQ(s.occurrence_histogram, (std::map<std::uint64_t, std::uint64_t>{{1, 38}, {2, 1}}));
  EXPECT_EQ(s.n_nonascii_questions, 2u);
  EXPECT_EQ(s.n_pairs_with_nonascii, 2u);
  EXPECT_EQ(s.n_pairs_with_empty_question, 1u);
}

TEST(ComputeStats, QidIdentityAgreesOnFixture) {
  const DatasetStats by_text = compute_stats(fixture());
  const DatasetStats by_qid = compute_stats(fixture(), QuestionIdentity::qid);
  EXPECT_EQ(by_text.n_unique_questions, by_qid.n_unique_questions);
  EXPECT_EQ(by_text.occurrence_histogram, by_qid.occurrence_histogram);
}

TEST(ComputeStats, SinglePair) {
  QuestionPair p;
  p.question1 = "a";
  p.question2 = "b";
  p.label = 1;
  const DatasetStats s = compute_stats({p});
  EXPECT_EQ(s.n_unique_questions, 2u);
  EXPECT_EQ(s.n_multi_occurrence_questions, 0u);
  EXPECT_EQ(s.n_positive, 1u);
}

TEST(ComputeStats, EmptyDatasetIsZeroed) { EXPECT_EQ(compute_stats({}), DatasetStats{}); }

TEST(ComputeStats, MatchesBruteForceOnSyntheticData) {
  const Dataset d = testing::synthetic_pairs(3000, 5);
  std::map<std::string, std::uint64_t> occ;
  for (const auto& p : d) {
    ++occ[p.question1];
    ++occ[p.question2];
  }
  const DatasetStats s = compute_stats(d);
  std::map<std::uint64_t, std::uint64_t> hist;
  std::uint64_t multi = 0, max_occ = 0;
  for (const auto& [_, c] : occ) {
    ++hist[c];
    multi += c > 1;
    max_occ = std::max(max_occ, c);
  }
  EXPECT_EQ(s.n_unique_questions, occ.size());
  EXPECT_EQ(s.n_multi_occurrence_questions, multi);
  EXPECT_EQ(s.max_question_occurrence, max_occ);
  EXPECT_EQ(s.occurrence_histogram, hist);
}

// ---------------------------------------------------------------------------
// Splits

Dataset labelled(std::size_t n_pos, std::size_t n_neg) {
  Dataset d;
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    QuestionPair p;
    p.pair_id = static_cast<std::int64_t>(i);
    p.question1 = "q" + std::to_string(2 * i);
    p.question2 = "q" + std::to_string(2 * i + 1);
    p.label = i < n_pos ? 1 : 0;
    d.push_back(p);
  }
  return d;
}

std::vector<std::int64_t> ids(const Dataset& d) {
  std::vector<std::int64_t> out;
  for (const auto& p : d) out.push_back(p.pair_id);
  return out;
}

TEST(BlindSplit, FullCorpusSizes) {
  // Same size and label balance as the full training file.
  const SplitResult s = blind_split(labelled(149263, 255027), {}, 1);
  EXPECT_EQ(s.train.size(), 283003u);
  EXPECT_EQ(s.validation.size(), 80858u);
  EXPECT_EQ(s.test.size(), 40429u);
}

TEST(BlindSplit, DegenerateRatioPutsEverythingInTrain) {
  const Dataset d = labelled(10, 15);
  const SplitResult s = blind_split(d, {1.0, 0.0, 0.0}, 3);
  EXPECT_EQ(ids(s.train), ids(d));
  EXPECT_TRUE(s.validation.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(BlindSplit, SameSeedSameMembership) {
  const Dataset d = testing::synthetic_pairs(500, 2);
  const SplitResult a = blind_split(d, {}, 42), b = blind_split(d, {}, 42);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ids(a.part(i)), ids(b.part(i)));
  const SplitResult c = blind_split(d, {}, 43);
  EXPECT_NE(ids(a.test), ids(c.test));
}

TEST(BlindSplit, TooFewPositivesNamesTheClass) {
  try {
    blind_split(labelled(2, 50), {}, 0);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("positive"), std::string::npos);
  }
}

TEST(BlindSplit, RejectsBadRatios) {
  EXPECT_THROW(blind_split(labelled(5, 5), {0.5, 0.2, 0.2}, 0), ConfigError);
  EXPECT_THROW(blind_split(labelled(5, 5), {1.2, -0.1, -0.1}, 0), ConfigError);
}

// Builds components of the given pair counts, each a chain over fresh questions.
Dataset components(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  Dataset d;
  Rng rng(seed);
  int q = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const int first = q++;
    for (std::size_t k = 0; k < sizes[c]; ++k) {
      QuestionPair p;
      p.pair_id = static_cast<std::int64_t>(d.size());
      p.question1 = "c" + std::to_string(c) + " q" + std::to_string(rng.uniform01() < 0.5 ? first : q - 1);
      p.question2 = "c" + std::to_string(c) + " q" + std::to_string(q++);
      p.label = rng.uniform01() < 0.4 ? 1 : 0;
      d.push_back(p);
    }
  }
  return d;
}

int part_of(const SplitResult& s, std::int64_t id) {
  for (int i = 0; i < 3; ++i) {
    for (const auto& p : s.part(i))
      if (p.pair_id == id) return i;
  }
  return -1;
}

TEST(DisjointSplit, ComponentsStayWhole) {
  const Dataset d = components({7, 2, 1}, 11);
  const SplitResult s = disjoint_split(d, {}, 0);
  for (auto [lo, hi] : {std::pair{0, 7}, std::pair{7, 9}, std::pair{9, 10}}) {
    const int part = part_of(s, lo);
    for (int id = lo; id < hi; ++id) EXPECT_EQ(part_of(s, id), part) << id;
  }
}

TEST(DisjointSplit, GiantComponentWarnsAndStaysDisjoint) {
  Dataset d;
  for (int i = 0; i < 30; ++i) {
    QuestionPair p;
    p.pair_id = i;
    p.question1 = "hub";
    p.question2 = "spoke " + std::to_string(i);
    p.label = i % 3 == 0;
    d.push_back(p);
  }
  const SplitResult s = disjoint_split(d, {}, 0);
  EXPECT_FALSE(s.warnings.empty());
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), 30u);
  EXPECT_EQ(std::max({s.train.size(), s.validation.size(), s.test.size()}), 30u);
}

TEST(DisjointSplit, FixtureSeed7HasNoSharedQuestions) {
  const Dataset d = load_pairs(data_path("pairs100.csv"), true);
  ASSERT_EQ(d.size(), 100u);
  const SplitResult s = disjoint_split(d, {}, 7);
  const auto t = texts(s.train), v = texts(s.validation), e = texts(s.test);
  auto shared = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out.size();
  };
  EXPECT_EQ(shared(t, v), 0u);
  EXPECT_EQ(shared(t, e), 0u);
  EXPECT_EQ(shared(v, e), 0u);
  EXPECT_EQ(question_overlap(s.train, s.validation), 0u);
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), 100u);
}

TEST(WriteSplit, DisjointManifestRecordsCheck) {
  TempDir tmp("split");
  const SplitResult s = disjoint_split(load_pairs(data_path("pairs100.csv"), true), {}, 7);
  write_split(tmp.path().string(), s);
  const std::string manifest = read_file(tmp.file("manifest.txt"));
  EXPECT_NE(manifest.find("kind = disjoint"), std::string::npos);
  EXPECT_NE(manifest.find("achieved_ratios = "), std::string::npos);
  EXPECT_NE(manifest.find("disjoint = true"), std::string::npos);
  EXPECT_EQ(load_pairs(tmp.file("test.csv"), true).size(), s.test.size());
}

TEST(WriteSplit, SameSeedGivesIdenticalFiles) {
  TempDir a("split_a"), b("split_b");
  const Dataset d = testing::synthetic_pairs(400, 9);
  write_split(a.path().string(), blind_split(d, {}, 5));
  write_split(b.path().string(), blind_split(d, {}, 5));
  for (const char* f : {"train.csv", "valid.csv", "test.csv", "manifest.txt"})
    EXPECT_EQ(fnv1a(read_file(a.file(f))), fnv1a(read_file(b.file(f)))) << f;
}

// ---------------------------------------------------------------------------
// Split invariants over random seeds.

class SplitProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SplitProperties, BlindIsStratifiedPartition) {
  const std::uint64_t seed = GetParam();
  Rng rng(seed);
  const std::size_t n = 200 + rng.uniform_index(800);
  const Dataset d = testing::synthetic_pairs(n, seed);
  const SplitResult s = blind_split(d, {}, seed);
  std::vector<std::int64_t> all;
  for (int i = 0; i < 3; ++i) {
    const auto part = ids(s.part(i));
    EXPECT_TRUE(std::is_sorted(part.begin(), part.end())) << "input order kept";
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, ids(d));
  EXPECT_EQ(s.validation.size(), static_cast<std::size_t>(std::floor(n * 0.2)));
  EXPECT_EQ(s.test.size(), static_cast<std::size_t>(std::floor(n * 0.1)));
  const auto pos = [](const Dataset& x) {
    return static_cast<double>(std::count_if(x.begin(), x.end(), [](const auto& p) { return p.label == 1; }));
  };
  const double overall = pos(d) / static_cast<double>(n);
  for (int i = 0; i < 3; ++i) {
    const auto& part = s.part(i);
    // Rounding can move at most one pair per class.
    EXPECT_LE(std::abs(pos(part) - overall * static_cast<double>(part.size())), 1.0) << i;
  }
}

TEST_P(SplitProperties, DisjointHasNoSharedQuestions) {
  const std::uint64_t seed = GetParam();
  Rng rng(seed);
  std::vector<std::size_t> sizes;
  for (int c = 0; c < 60; ++c) sizes.push_back(1 + rng.uniform_index(rng.uniform01() < 0.1 ? 12 : 3));
  const Dataset d = components(sizes, seed);
  const SplitResult s = disjoint_split(d, {}, seed);
  EXPECT_EQ(question_overlap(s.train, s.validation), 0u);
  EXPECT_EQ(question_overlap(s.train, s.test), 0u);
  EXPECT_EQ(question_overlap(s.validation, s.test), 0u);
  std::vector<std::int64_t> all;
  for (int i = 0; i < 3; ++i) {
    const auto part = ids(s.part(i));
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, ids(d));
  const double n = static_cast<double>(d.size());
  EXPECT_NEAR(static_cast<double>(s.train.size()) / n, 0.7, 0.1);
}

INSTANTIATE_TEST_SUITE_P(Seeds, SplitProperties, ::testing::Range<std::uint64_t>(1, 21));

}  // namespace
}  // namespace dupq
