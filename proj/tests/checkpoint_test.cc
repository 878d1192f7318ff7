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

#include "hkge/checkpoint.h"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"
#include "test_support.h"

namespace hkge {
namespace {

class CheckpointTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  Dataset ds;
  RunConfig config;

  void SetUp() override {
    testing::write_file(dir / "train.txt", "a\tr\tb\nb\ts\tc\n");
    ds = load_dataset(dir / "train.txt", "", "");
    config.model.kind = ModelKind::kTetra;
    config.model.dim = 2;
    config.seed = 9;
    config.text_tables = {{"word2vec", "/w.emb"}};
  }

  Model tetra(std::uint64_t seed) const {
    TextInputs in;
    in.slots.push_back(testing::synthetic_table("word2vec", 3, 4, 1));
    Model m(config.model, ds.entities.size(), ds.relations.size(), in);
    testing::randomize_params(m, seed);
    return m;
  }
};

TEST_F(CheckpointTest, RoundTripRestoresEveryTensor) {
  const Model saved = tetra(1);
  save_checkpoint(dir / "c.json", config, ds, saved);
  const Checkpoint c = load_checkpoint(dir / "c.json");
  EXPECT_EQ(c.config, config);
  EXPECT_EQ(c.entities, ds.entities.labels());
  EXPECT_EQ(c.relations, ds.relations.labels());
  EXPECT_EQ(c.text_sources, std::vector<std::string>{"word2vec"});
  Model restored = tetra(2);
  restore_checkpoint(c, ds, restored);
  const auto a = saved.params().tensors();
  const auto b = std::as_const(restored).params().tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]) << a[i]->name;
  EXPECT_EQ(checkpoint_json(config, ds, saved), checkpoint_json(config, ds, restored));
}

TEST_F(CheckpointTest, JsonLayout) {
  const auto j = nlohmann::json::parse(checkpoint_json(config, ds, tetra(1)));
  EXPECT_EQ(j["format"], "hkge-checkpoint");
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["tensors"][0]["name"], "graph_entity");
  EXPECT_EQ(j["tensors"][0]["rows"], 3);
  EXPECT_EQ(j["tensors"][0]["cols"], 6);
}

TEST_F(CheckpointTest, MismatchesAreDetected) {
  save_checkpoint(dir / "c.json", config, ds, tetra(1));
  const Checkpoint c = load_checkpoint(dir / "c.json");

  testing::write_file(dir / "other.txt", "b\tr\ta\nb\ts\tc\n");
  const Dataset reordered = load_dataset(dir / "other.txt", "", "");
  Model m = tetra(1);
  EXPECT_THROW(restore_checkpoint(c, reordered, m), CheckpointMismatch);

  TextInputs in;
  in.slots.push_back(testing::synthetic_table("fasttext", 3, 4, 1));
  Model wrong_source(config.model, 3, 4, in);
  EXPECT_THROW(restore_checkpoint(c, ds, wrong_source), CheckpointMismatch);

  ModelSpec bigger = config.model;
  bigger.dim = 3;
  TextInputs same;
  same.slots.push_back(testing::synthetic_table("word2vec", 3, 4, 1));
  Model wrong_shape(bigger, 3, 4, same);
  EXPECT_THROW(restore_checkpoint(c, ds, wrong_shape), CheckpointMismatch);
}

TEST_F(CheckpointTest, MalformedFilesAreDataErrors) {
  EXPECT_THROW(load_checkpoint(dir / "absent.json"), IoError);
  testing::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), DataError);
  testing::write_file(dir / "bad.json", R"({"format":"other","version":1})");
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), DataError);

  auto j = nlohmann::json::parse(checkpoint_json(config, ds, tetra(1)));
  j["version"] = 2;
  testing::write_file(dir / "bad.json", j.dump());
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), DataError);
  j["version"] = 1;
  j["tensors"][0]["rows"] = 4;
  testing::write_file(dir / "bad.json", j.dump());
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), DataError);
  j.erase("entities");
  testing::write_file(dir / "bad.json", j.dump());
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), DataError);
}

}  // namespace
}  // namespace hkge
