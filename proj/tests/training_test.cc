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

#include "hkge/training.h"

#include <array>
#include <cmath>
#include <numbers>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"
#include "hkge/evaluation.h"
#include "test_support.h"

namespace hkge {
namespace {

using ::testing::Each;
using ::testing::ElementsAre;

const Dataset& nations() {
  static const Dataset ds =
      load_dataset(testing::data_path("nations/train.txt"), testing::data_path("nations/valid.txt"),
                   testing::data_path("nations/test.txt"));
  return ds;
}

Model tetra_zero(std::size_t n_e, std::size_t n_r, std::size_t dim = 3) {
  ModelSpec spec;
  spec.dim = dim;
  return Model(spec, n_e, n_r, {});
}

// Every entity at the origin, so every candidate tail scores the same.
Model flat_model(std::size_t n_e) {
  Model m = tetra_zero(n_e, 2);
  m.initialize(1);
  std::fill(m.params().graph_entity.data.begin(), m.params().graph_entity.data.end(), 0.0);
  return m;
}

TEST(LossTest, UniformScoresGiveLogCandidates) {
  Model m = flat_model(14);
  const std::vector<Triple> batch = {{0, 0, 1}, {3, 1, 13}};
  EXPECT_NEAR(batch_loss(m, batch, {}, nullptr), std::log(14.0), 1e-12);
  const std::vector<std::vector<std::size_t>> neg = {{2, 3, 4}, {5}};
  EXPECT_NEAR(batch_loss(m, batch, neg, nullptr), 2 * std::numbers::ln2, 1e-12);
}

TEST(LossTest, SampledLossHandComputed) {
  Model m = flat_model(4);
  m.params().bias_tail.data = {0.5, -1.0, 2.0, 0.0};
  const std::vector<Triple> batch = {{0, 0, 1}};
  const std::vector<std::vector<std::size_t>> neg = {{2, 3}};
  auto softplus = [](double x) { return std::log1p(std::exp(x)); };
  const double expected = softplus(1.0) + 0.5 * (softplus(2.0) + softplus(0.0));
  EXPECT_NEAR(batch_loss(m, batch, neg, nullptr), expected, 1e-12);

  double lse = 0.0;
  for (double b : m.params().bias_tail.data) lse += std::exp(b);
  EXPECT_NEAR(batch_loss(m, batch, {}, nullptr), std::log(lse) + 1.0, 1e-12);
}

TEST(LossTest, SoftmaxIsInvariantToHeadBiasShift) {
  Model m = tetra_zero(6, 2);
  testing::randomize_params(m, 4);
  const std::vector<Triple> batch = {{0, 1, 2}, {5, 0, 5}};
  const double before = batch_loss(m, batch, {}, nullptr);
  for (double& b : m.params().bias_head.data) b += 7.5;
  EXPECT_NEAR(batch_loss(m, batch, {}, nullptr), before, 1e-12);
}

TEST(LossTest, NonNegativeAndThreadInvariant) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Model m = tetra_zero(14, 110, 4);
    testing::randomize_params(m, seed);
    std::vector<Triple> batch(nations().train.begin(), nations().train.begin() + 50);
    std::vector<std::vector<std::size_t>> neg;
    for (const Triple& t : batch) neg.push_back(sample_negatives(rng, t, 10, nations().filter, 14));
    for (auto negatives : {std::span<const std::vector<std::size_t>>(neg), std::span<const std::vector<std::size_t>>()}) {
      Gradients g1 = Gradients::like(m.params()), g4 = Gradients::like(m.params());
      const double l1 = batch_loss(m, batch, negatives, &g1, 1);
      const double l4 = batch_loss(m, batch, negatives, &g4, 4);
      EXPECT_GE(l1, 0.0);
      EXPECT_EQ(l1, l4);
      EXPECT_EQ(g1.values.graph_entity, g4.values.graph_entity);
      EXPECT_EQ(g1.values.relation, g4.values.relation);
    }
  }
}

TEST(LossTest, SmallAdagradStepDescends) {
  Model m = tetra_zero(14, 110, 4);
  testing::randomize_params(m, 2);
  std::vector<Triple> batch(nations().train.begin(), nations().train.begin() + 40);
  Gradients g = Gradients::like(m.params());
  const double before = batch_loss(m, batch, {}, &g);
  AdagradState state = AdagradState::like(m.params());
  adagrad_step(m.params(), g, state, 1e-3);
  EXPECT_LT(batch_loss(m, batch, {}, nullptr), before);
}

TEST(LossTest, InputValidation) {
  Model m = flat_model(3);
  const std::vector<Triple> batch = {{0, 0, 1}};
  EXPECT_THROW(batch_loss(m, {}, {}, nullptr), ConfigError);
  const std::vector<std::vector<std::size_t>> two = {{1}, {2}};
  EXPECT_THROW(batch_loss(m, batch, two, nullptr), DimensionMismatch);
  const std::vector<std::vector<std::size_t>> none = {{}};
  EXPECT_THROW(batch_loss(m, batch, none, nullptr), ConfigError);
  const std::vector<Triple> bad = {{0, 0, 9}};
  EXPECT_THROW(batch_loss(m, bad, {}, nullptr), UnknownEntity);
}

TEST(LossTest, OverflowIsReportedAsDivergence) {
  Model m = tetra_zero(3, 1);
  testing::randomize_params(m, 1);
  m.params().graph_entity.at(2, 0) = 1e200;
  const std::vector<Triple> batch = {{0, 0, 2}};
  EXPECT_THROW(batch_loss(m, batch, {}, nullptr), Diverged);
}

TEST(AdagradTest, FirstTwoStepsByHand) {
  std::array<double, 1> theta{0.0}, accum{0.0};
  const std::array<double, 1> grad{1.0};
  adagrad_update(theta, grad, accum, 0.1);
  EXPECT_NEAR(theta[0], -0.09999999900, 1e-11);
  EXPECT_EQ(accum[0], 1.0);
  const double first = theta[0];
  adagrad_update(theta, grad, accum, 0.1);
  EXPECT_NEAR(theta[0] - first, -0.1 / (std::sqrt(2.0) + kAdagradEpsilon), 1e-15);
  EXPECT_NEAR(first - theta[0], 0.0707, 1e-4);
}

TEST(AdagradTest, ZeroGradientChangesNothing) {
  std::array<double, 3> theta{1.0, -2.0, 3.0}, accum{0.5, 0.0, 2.0};
  const std::array<double, 3> grad{0.0, 0.0, 0.0};
  adagrad_update(theta, grad, accum, 0.5);
  EXPECT_THAT(theta, ElementsAre(1.0, -2.0, 3.0));
  EXPECT_THAT(accum, ElementsAre(0.5, 0.0, 2.0));
}

TEST(AdagradTest, ShapeMismatchIsRejected) {
  std::array<double, 2> theta{}, accum{};
  const std::array<double, 3> grad{};
  EXPECT_THROW(adagrad_update(theta, grad, accum, 0.1), DimensionMismatch);
}

TEST(AdagradTest, OnlyTouchedRowsMove) {
  Model m = tetra_zero(5, 3);
  testing::randomize_params(m, 3);
  const ModelParams before = m.params();
  Gradients g = Gradients::like(m.params());
  const std::vector<Triple> batch = {{0, 1, 2}};
  const std::vector<std::vector<std::size_t>> neg = {{3}};
  batch_loss(m, batch, neg, &g);
  AdagradState state = AdagradState::like(m.params());
  adagrad_step(m.params(), g, state, 0.1);
  EXPECT_EQ(m.params().graph_entity.row(4)[0], before.graph_entity.row(4)[0]);
  EXPECT_EQ(m.params().relation.row(0)[0], before.relation.row(0)[0]);
  EXPECT_NE(m.params().graph_entity.row(0)[0], before.graph_entity.row(0)[0]);
  EXPECT_NE(m.params().relation.row(1)[0], before.relation.row(1)[0]);
}

TEST(SamplingTest, UniformOverUnfilteredEntities) {
  // Chi-square goodness of fit, 9 degrees of freedom, p = 0.001.
  constexpr double kCritical = 27.877;
  constexpr std::size_t kDraws = 100000, kEntities = 10;
  std::mt19937_64 rng(2024);
  const FilterIndex empty;
  const auto draws = sample_negatives(rng, Triple{0, 0, 0}, kDraws, empty, kEntities);
  std::array<double, kEntities> counts{};
  for (std::size_t t : draws) counts.at(t) += 1.0;
  const double expected = static_cast<double>(kDraws) / kEntities;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, kCritical);
}

TEST(SamplingTest, SkipsFilteredTails) {
  const std::vector<Triple> known = {{0, 0, 0}, {0, 0, 1}};
  const std::span<const Triple> splits[] = {known};
  const FilterIndex filter(1, splits);
  std::mt19937_64 rng(5);
  EXPECT_THAT(sample_negatives(rng, Triple{0, 0, 1}, 50, filter, 3), Each(2u));
}

TEST(SamplingTest, FallsBackWhenEveryTailIsFiltered) {
  const std::vector<Triple> known = {{0, 0, 0}, {0, 0, 1}};
  const std::span<const Triple> splits[] = {known};
  const FilterIndex filter(1, splits);
  std::mt19937_64 rng(5);
  const auto out = sample_negatives(rng, Triple{0, 0, 1}, 4, filter, 2);
  EXPECT_EQ(out.size(), 4u);
  for (std::size_t t : out) EXPECT_LT(t, 2u);
}

TEST(SamplingTest, SingleEntityCannotBeSampled) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(sample_negatives(rng, Triple{0, 0, 0}, 1, FilterIndex{}, 1), CannotSample);
}

RunConfig small_config() {
  RunConfig c;
  c.model.dim = 4;
  c.batch_size = 256;
  c.learning_rate = 0.05;
  c.negatives = 8;
  c.max_epochs = 4;
  c.eval_every = 2;
  c.seed = 3;
  return c;
}

TEST(TrainTest, ZeroEpochsLeavesInitialParameters) {
  RunConfig c = small_config();
  c.max_epochs = 0;
  Model trained = tetra_zero(14, 110, 4), fresh = tetra_zero(14, 110, 4);
  TrainResult r = train(c, nations(), trained);
  fresh.initialize(c.seed);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.best_epoch, 0u);
  EXPECT_EQ(trained.params().graph_entity, fresh.params().graph_entity);
  EXPECT_EQ(trained.params().relation, fresh.params().relation);
}

TEST(TrainTest, DeterministicAcrossThreadCounts) {
  RunConfig c = small_config();
  Model a = tetra_zero(14, 110, 4), b = tetra_zero(14, 110, 4);
  TrainResult ra = train(c, nations(), a, {1, {}});
  TrainResult rb = train(c, nations(), b, {4, {}});
  ASSERT_EQ(ra.log.size(), rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) EXPECT_EQ(log_line(ra.log[i], false), log_line(rb.log[i], false));
  for (std::size_t t = 0; t < a.params().tensors().size(); ++t) {
    EXPECT_EQ(*a.params().tensors()[t], *b.params().tensors()[t]);
  }
}

TEST(TrainTest, ValidationScheduleAndBestRestore) {
  RunConfig c = small_config();
  c.max_epochs = 5;
  std::vector<std::size_t> seen;
  Model m = tetra_zero(14, 110, 4);
  TrainResult r = train(c, nations(), m, {1, [&](const EpochRecord& e) { seen.push_back(e.epoch); }});
  EXPECT_THAT(seen, ElementsAre(1, 2, 3, 4, 5));
  ASSERT_EQ(r.log.size(), 5u);
  EXPECT_FALSE(r.log[0].val_mrr.has_value());
  EXPECT_TRUE(r.log[1].val_mrr.has_value());
  EXPECT_FALSE(r.log[2].val_mrr.has_value());
  EXPECT_TRUE(r.log[3].val_mrr.has_value());
  EXPECT_TRUE(r.log[4].val_mrr.has_value());
  EXPECT_EQ(*r.log[r.best_epoch - 1].val_mrr, r.best_valid_mrr);
  EXPECT_DOUBLE_EQ(evaluate(m, nations(), Split::kValid).both.mrr, r.best_valid_mrr);
  for (const auto& e : r.log) EXPECT_TRUE(std::isfinite(e.mean_loss));
}

TEST(TrainTest, PatienceCountsEvaluations) {
  RunConfig c = small_config();
  c.learning_rate = 1e-12;
  c.max_epochs = 50;
  c.eval_every = 1;
  c.patience = 2;
  Model m = tetra_zero(14, 110, 4);
  TrainResult r = train(c, nations(), m);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.log.size(), 50u);
  EXPECT_EQ(r.log.size(), r.best_epoch + c.patience);
}

TEST(TrainTest, InvalidConfigIsRejected) {
  RunConfig c = small_config();
  c.negatives = 0;
  Model m = tetra_zero(14, 110, 4);
  EXPECT_THROW(train(c, nations(), m), ConfigError);
}

TEST(LogLineTest, Format) {
  EpochRecord e{3, 0.5, std::nullopt, 12.0};
  EXPECT_EQ(log_line(e, false), R"({"epoch":3,"mean_loss":0.5,"val_mrr":null})");
  e.val_mrr = 0.25;
  auto j = nlohmann::json::parse(log_line(e, true));
  EXPECT_EQ(j["val_mrr"], 0.25);
  EXPECT_EQ(j["elapsed_ms"], 12.0);
}

}  // namespace
}  // namespace hkge
