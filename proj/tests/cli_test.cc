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

#include "cli.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hkge/checkpoint.h"
#include "hkge/kg_data.h"
#include "test_support.h"

namespace hkge {
namespace {

using ::testing::HasSubstr;
using testing::read_file;
using testing::write_file;

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir;

  void SetUp() override {
    write_file(dir / "train.txt", "a\tr\tb\nb\tr\tc\nc\ts\ta\nd\ts\tb\na\ts\td\n");
    write_file(dir / "valid.txt", "b\ts\tc\n");
    write_file(dir / "test.txt", "a\tr\tc\n");
    write_file(dir / "run.cfg",
               "model=tetra_zero\ndim=2\nbatch_size=4\nlearning_rate=0.1\nnegatives=2\nmax_epochs=3\n"
               "eval_every=1\npatience=5\nseed=1\ntrain=train.txt\nvalid=valid.txt\ntest=test.txt\n");
  }

  int run(std::vector<std::string> args) {
    ::testing::internal::CaptureStdout();
    const int code = cli::run(args);
    stdout_ = ::testing::internal::GetCapturedStdout();
    return code;
  }

  std::string cfg() const { return (dir / "run.cfg").string(); }
  std::string out(const std::string& name) const { return (dir / name).string(); }
  std::string stdout_;
};

TEST_F(CliTest, TrainWritesAllArtifacts) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o")}), cli::kOk);
  for (const char* f : {"config.resolved.cfg", "train_log.jsonl", "checkpoint.json", "eval_test.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "o" / f)) << f;
  }
  EXPECT_THAT(stdout_, HasSubstr("MRR"));
  const std::string log = read_file(dir / "o" / "train_log.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
  EXPECT_THAT(log, ::testing::Not(HasSubstr("elapsed_ms")));
  const auto report = nlohmann::json::parse(read_file(dir / "o" / "eval_test.json"));
  EXPECT_EQ(report["both"]["queries"], 2);
}

TEST_F(CliTest, TimingIsOptIn) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--log-timing"}), cli::kOk);
  EXPECT_THAT(read_file(dir / "o" / "train_log.jsonl"), HasSubstr("elapsed_ms"));
}

TEST_F(CliTest, SetAndSeedOverrideTheConfig) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "dim=3", "--set", "max_epochs=1",
                 "--seed", "77"}),
            cli::kOk);
  const std::string resolved = read_file(dir / "o" / "config.resolved.cfg");
  EXPECT_THAT(resolved, HasSubstr("dim=3\n"));
  EXPECT_THAT(resolved, HasSubstr("max_epochs=1\n"));
  EXPECT_THAT(resolved, HasSubstr("seed=77\n"));
}

TEST_F(CliTest, EvalAnalyzeExportFromCheckpoint) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o")}), cli::kOk);
  const std::string ckpt = out("o/checkpoint.json");
  ASSERT_EQ(run({"eval", "--checkpoint", ckpt, "--split", "valid", "--json", out("v.json")}), cli::kOk);
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "v.json"))["split"], "valid");
  ASSERT_EQ(run({"analyze", "--checkpoint", ckpt, "--cosine", "--threads", "2"}), cli::kOk);
  EXPECT_THAT(stdout_, HasSubstr("query\\tail"));
  ASSERT_EQ(run({"export", "--checkpoint", ckpt, "--output", out("e.emb")}), cli::kOk);
  Vocabulary entities;
  for (const char* e : {"a", "b", "c", "d"}) entities.intern(e);
  const TextTable t = load_text_table(dir / "e.emb", "hkge-export", entities);
  EXPECT_EQ(t.dim, 8u);
  EXPECT_EQ(t.coverage.covered, 4u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "colour=red"}), cli::kConfig);
  EXPECT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "negatives=0"}), cli::kConfig);
  EXPECT_EQ(run({"train", "--config", out("missing.cfg")}), cli::kConfig);
  EXPECT_EQ(run({"train", "--bogus"}), cli::kConfig);
  EXPECT_EQ(run({"train", "--out-dir", out("o")}), cli::kConfig);
  EXPECT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "train=" + out("absent.txt")}),
            cli::kData);
  write_file(dir / "broken.txt", "a\tr\n");
  EXPECT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "train=" + out("broken.txt")}),
            cli::kData);
  EXPECT_EQ(run({"eval", "--checkpoint", out("nothing.json")}), cli::kData);
  write_file(dir / "junk.json", "{}");
  EXPECT_EQ(run({"eval", "--checkpoint", out("junk.json")}), cli::kData);
  EXPECT_EQ(run({}), cli::kConfig);
  EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, CheckpointFromAnotherGraphIsRejected) {
  ASSERT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o")}), cli::kOk);
  write_file(dir / "other.txt", "x\tr\ty\n");
  EXPECT_EQ(run({"eval", "--checkpoint", out("o/checkpoint.json"), "--set", "train=" + out("other.txt"), "--set",
                 "valid=", "--set", "test="}),
            cli::kCheckpoint);
}

TEST_F(CliTest, DivergenceExitCode) {
  EXPECT_EQ(run({"train", "--config", cfg(), "--out-dir", out("o"), "--set", "init_scale=1e200"}), cli::kDiverged);
}

class CliShapleyTest : public CliTest {
 protected:
  void write_tables(std::size_t head_sentences, std::size_t tail_sentences) {
    Vocabulary entities;
    for (const char* e : {"a", "b", "c", "d"}) entities.intern(e);
    testing::write_table_file(out("w.emb"), *testing::synthetic_table("word2vec", 4, 3, 1), entities);
    auto sentences = testing::synthetic_table("sentence", 4, 3, 2, 1);
    auto resize = [&](std::size_t e, std::size_t n) {
      std::mt19937_64 rng(e);
      auto& list = sentences->sentence_vectors[e];
      list.clear();
      for (std::size_t s = 0; s < n; ++s) list.push_back(testing::random_vector(rng, 3));
    };
    resize(0, head_sentences);
    resize(2, tail_sentences);
    testing::write_table_file(out("s.emb"), *sentences, entities);
  }
  std::vector<std::string> train_args() {
    return {"train", "--config", cfg(), "--out-dir", out("o"), "--set", "model=tetra", "--set",
            "text_tables=word2vec:" + out("w.emb") + ",sentence:" + out("s.emb")};
  }
};

TEST_F(CliShapleyTest, ReportsOneValuePerSentence) {
  write_tables(3, 2);
  ASSERT_EQ(run(train_args()), cli::kOk);
  ASSERT_EQ(run({"analyze", "--checkpoint", out("o/checkpoint.json"), "--shapley", "--head", "a", "--relation",
                 "r", "--tail", "c", "--json", out("s.json")}),
            cli::kOk);
  const auto j = nlohmann::json::parse(read_file(dir / "s.json"));
  EXPECT_EQ(j["shapley"]["sentences"].size(), 5u);
  EXPECT_EQ(j["shapley"]["slot"], 1);
}

TEST_F(CliShapleyTest, TwentyOneSentencesAreRefused) {
  write_tables(11, 10);
  ASSERT_EQ(run(train_args()), cli::kOk);
  EXPECT_EQ(run({"analyze", "--checkpoint", out("o/checkpoint.json"), "--shapley", "--head", "a", "--relation",
                 "r", "--tail", "c"}),
            cli::kConfig);
}

TEST_F(CliShapleyTest, UnknownLabelsAreDataErrors) {
  write_tables(1, 1);
  ASSERT_EQ(run(train_args()), cli::kOk);
  EXPECT_EQ(run({"analyze", "--checkpoint", out("o/checkpoint.json"), "--shapley", "--head", "zz", "--relation",
                 "r", "--tail", "c"}),
            cli::kData);
}

}  // namespace
}  // namespace hkge
