/*
 * Copyright 2026 The hkge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hkge/evaluation.h"

#include <cmath>
#include <random>
#include <set>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"
#include "test_support.h"

namespace hkge {
namespace {

using ::testing::ElementsAre;

TEST(FilteredRankTest, Examples) {
  const std::vector<double> scores = {3.0, 1.0, 2.0, 1.0};
  const std::vector<std::size_t> none;
  EXPECT_EQ(filtered_rank(scores, 0, none), 1.0);
  EXPECT_EQ(filtered_rank(scores, 2, none), 2.0);
  EXPECT_EQ(filtered_rank(scores, 1, none), 3.5);
  const std::vector<std::size_t> filtered = {0, 1, 3};
  EXPECT_EQ(filtered_rank(scores, 1, filtered), 2.0);
  EXPECT_EQ(filtered_rank(scores, 2, filtered), 1.0);
}

TEST(FilteredRankTest, AllTiedCountsHalf) {
  const std::vector<double> scores(9, -4.0);
  EXPECT_EQ(filtered_rank(scores, 4, {}), 5.0);
  const std::vector<std::size_t> filtered = {0, 1, 4};
  EXPECT_EQ(filtered_rank(scores, 4, filtered), 4.0);
}

TEST(FilteredRankTest, Errors) {
  const std::vector<double> scores = {1.0, NAN};
  EXPECT_THROW(filtered_rank(scores, 2, {}), DimensionMismatch);
  EXPECT_THROW(filtered_rank(scores, 1, {}), Diverged);
}

TEST(FilteredRankTest, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> size(1, 30);
  std::uniform_int_distribution<int> level(0, 4);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> scores(n);
    for (double& s : scores) s = static_cast<double>(level(rng));
    const std::size_t target = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::set<std::size_t> filtered;
    for (std::size_t e = 0; e < n; ++e) {
      if (coin(rng)) filtered.insert(e);
    }
    const std::vector<std::size_t> sorted(filtered.begin(), filtered.end());
    EXPECT_EQ(filtered_rank(scores, target, sorted), testing::brute_force_rank(scores, target, filtered));
  }
}

TEST(SummarizeTest, Examples) {
  const std::vector<double> ranks = {1.0, 2.0, 4.0, 20.0};
  const Metrics m = summarize_ranks(ranks);
  EXPECT_EQ(m.queries, 4u);
  EXPECT_DOUBLE_EQ(m.mrr, 0.45);
  EXPECT_DOUBLE_EQ(m.hits1, 0.25);
  EXPECT_DOUBLE_EQ(m.hits3, 0.5);
  EXPECT_DOUBLE_EQ(m.hits10, 0.75);
  EXPECT_EQ(summarize_ranks({}).queries, 0u);
  const std::vector<double> half = {1.5};
  EXPECT_EQ(summarize_ranks(half).hits1, 0.0);
}

class ToyEvalTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  Dataset ds;
  void SetUp() override {
    testing::write_file(dir / "train.txt", "a\tr\tb\nb\tr\tc\nc\tr\td\n");
    testing::write_file(dir / "test.txt", "a\tr\tc\n");
    ds = load_dataset(dir / "train.txt", "", dir / "test.txt");
  }
};

TEST_F(ToyEvalTest, BothDirectionsAgainstHandRanks) {
  ModelSpec spec;
  spec.kind = ModelKind::kTransE;
  spec.dim = 1;
  Model m(spec, 4, 2, {});
  // Entities on a line, r moves one step right; bias favours d as a tail.
  m.params().graph_entity.data = {0.0, 1.0, 2.0, 3.0};
  m.params().relation.data = {1.0, -1.0};
  m.params().bias_tail.data = {0.0, 0.0, 0.0, 0.5};
  // Tail query (a, r, ?) = 1: b 0, a -1, c -1, d -4+0.5. Target c; b is filtered, a ties.
  // Head query (c, r^-1, ?) = 1: b 0, a -1, c -1, d -3.5. Target a; b is filtered, c ties.
  const EvalReport r = evaluate(m, ds, Split::kTest);
  EXPECT_THAT(r.ranks, ElementsAre(1.5, 1.5));
  EXPECT_EQ(r.tail.queries, 1u);
  EXPECT_EQ(r.head.queries, 1u);
  EXPECT_DOUBLE_EQ(r.both.mrr, 1.0 / 1.5);
  EXPECT_EQ(rank_queries(m, std::vector<Triple>{{0, 0, 3}}, ds.filter), std::vector<double>{2.0});
}

TEST_F(ToyEvalTest, JsonAndTable) {
  ModelSpec spec;
  spec.kind = ModelKind::kTransE;
  spec.dim = 1;
  Model m(spec, 4, 2, {});
  m.initialize(0);
  const EvalReport r = evaluate(m, ds, Split::kTest);
  auto j = nlohmann::json::parse(report_json(r, "test"));
  EXPECT_EQ(j["split"], "test");
  EXPECT_EQ(j["both"]["queries"], 2);
  EXPECT_DOUBLE_EQ(j["tail"]["mrr"].get<double>(), r.tail.mrr);
  EXPECT_TRUE(j["head"].contains("hits@10"));
  const std::string table = report_table(r);
  EXPECT_THAT(table, ::testing::HasSubstr("direction"));
  EXPECT_THAT(table, ::testing::HasSubstr("head"));
}

TEST(NationsEvalTest, UntrainedModelIsNearChance) {
  const Dataset ds = load_dataset(testing::data_path("nations/train.txt"), testing::data_path("nations/valid.txt"),
                                  testing::data_path("nations/test.txt"));
  ModelSpec spec;
  Model m(spec, ds.entities.size(), ds.relations.size(), {});
  m.initialize(0);
  const EvalReport one = evaluate(m, ds, Split::kTest, 1);
  EXPECT_EQ(one.both.queries, 2 * ds.test.size());
  EXPECT_GE(one.both.mrr, 0.05);
  EXPECT_LE(one.both.mrr, 0.45);
  const EvalReport four = evaluate(m, ds, Split::kTest, 4);
  EXPECT_EQ(one.ranks, four.ranks);
}

}  // namespace
}  // namespace hkge
