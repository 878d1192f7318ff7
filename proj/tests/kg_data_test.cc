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

#include "hkge/kg_data.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "hkge/error.h"
#include "test_support.h"

namespace hkge {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;
using testing::TempDir;
using testing::write_file;

TEST(VocabularyTest, FirstAppearanceOrder) {
  Vocabulary v;
  EXPECT_EQ(v.intern("b"), 0u);
  EXPECT_EQ(v.intern("a"), 1u);
  EXPECT_EQ(v.intern("b"), 0u);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.label(1), "a");
  EXPECT_EQ(v.find("a"), 1u);
  EXPECT_FALSE(v.find("c").has_value());
}

TEST(SplitTabsTest, DropsCarriageReturn) {
  EXPECT_THAT(split_tabs("a\tb\tc\r"), ElementsAre("a", "b", "c"));
  EXPECT_THAT(split_tabs("a\t\tc"), ElementsAre("a", "", "c"));
}

TEST(SplitSentencesTest, Examples) {
  EXPECT_THAT(split_sentences("One. Two? Three!"), ElementsAre("One.", "Two?", "Three!"));
  EXPECT_THAT(split_sentences("Version 1.5 is out. Next"), ElementsAre("Version 1.5 is out.", "Next"));
  EXPECT_THAT(split_sentences("   "), IsEmpty());
}

TEST(SplitTest, RoundTripsNames) {
  for (Split s : {Split::kTrain, Split::kValid, Split::kTest}) EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_split("dev"), ConfigError);
}

class LoaderTest : public ::testing::Test {
 protected:
  TempDir dir;
  Dataset load(const std::string& train, const std::string& valid = "", const std::string& test = "") {
    write_file(dir / "train.txt", train);
    write_file(dir / "valid.txt", valid);
    write_file(dir / "test.txt", test);
    return load_dataset(dir / "train.txt", dir / "valid.txt", dir / "test.txt");
  }
};

TEST_F(LoaderTest, ToyGraphIndicesAndInverses) {
  Dataset ds = load("a\tr\tb\nb\ts\tc\r\n\n", "a\ts\tc\n", "c\tr\ta\n");
  EXPECT_THAT(ds.entities.labels(), ElementsAre("a", "b", "c"));
  EXPECT_THAT(ds.relations.labels(), ElementsAre("r", "s", "r__inv", "s__inv"));
  EXPECT_EQ(ds.num_base_relations, 2u);
  EXPECT_EQ(ds.num_raw_train, 2u);
  EXPECT_THAT(ds.train, ElementsAre(Triple{0, 0, 1}, Triple{1, 1, 2}, Triple{1, 2, 0}, Triple{2, 3, 1}));
  EXPECT_THAT(ds.valid, ElementsAre(Triple{0, 1, 2}));
  EXPECT_THAT(ds.test, ElementsAre(Triple{2, 0, 0}));
  EXPECT_EQ(ds.inverse(0), 2u);
  EXPECT_EQ(ds.inverse(3), 1u);
}

TEST_F(LoaderTest, FilterCoversEverySplitAndInverses) {
  Dataset ds = load("a\tr\tb\nc\tr\tb\n", "a\tr\tc\n", "c\tr\ta\n");
  EXPECT_THAT(testing::to_vector(ds.filter.tails(0, 0)), ElementsAre(1, 2));
  EXPECT_TRUE(ds.filter.contains(1, 1, 0));
  EXPECT_TRUE(ds.filter.contains(2, 1, 0));
  EXPECT_TRUE(ds.filter.contains(1, 1, 2));
  EXPECT_FALSE(ds.filter.contains(1, 0, 0));
  EXPECT_THAT(testing::to_vector(ds.filter.tails(2, 1)), ElementsAre(0));
}

TEST_F(LoaderTest, ParseErrorsNameTheLine) {
  try {
    load("a\tr\tb\na\tr\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load("a\tr__inv\tb\n"), ParseError);
  EXPECT_THROW(load(""), ParseError);
}

TEST_F(LoaderTest, HeldOutLabelsMustAppearInTraining) {
  EXPECT_THROW(load("a\tr\tb\n", "a\tr\tz\n"), UnknownEntity);
  EXPECT_THROW(load("a\tr\tb\n", "", "a\tq\tb\n"), UnknownEntity);
}

TEST_F(LoaderTest, MissingFileIsAnIoError) {
  EXPECT_THROW(load_dataset(dir / "absent.txt", "", ""), IoError);
}

TEST_F(LoaderTest, EmptyHeldOutPathsGiveEmptySplits) {
  write_file(dir / "train.txt", "a\tr\tb\n");
  Dataset ds = load_dataset(dir / "train.txt", "", "");
  EXPECT_THAT(ds.valid, IsEmpty());
  EXPECT_THAT(ds.test, IsEmpty());
}

TEST_F(LoaderTest, TextAssetsDecodeEscapesAndReportCoverage) {
  Dataset ds = load("a\tr\tb\nb\tr\tc\n");
  write_file(dir / "names.tsv", "a\tAlpha\\tOne\nc\tGamma\\\\\n");
  write_file(dir / "desc.tsv", "b\tLine\\nbreak\n");
  TextAssets assets = load_text_assets(dir / "names.tsv", dir / "desc.tsv", ds.entities);
  EXPECT_EQ(assets.names.at(0), "Alpha\tOne");
  EXPECT_EQ(assets.names.at(2), "Gamma\\");
  EXPECT_EQ(assets.descriptions.at(1), "Line\nbreak");
  EXPECT_EQ(assets.name_coverage.covered, 2u);
  EXPECT_THAT(assets.name_coverage.missing, ElementsAre("b"));
  EXPECT_DOUBLE_EQ(assets.description_coverage.fraction(), 1.0 / 3.0);

  write_file(dir / "dup.tsv", "a\tx\na\ty\n");
  EXPECT_THROW(load_text_assets(dir / "dup.tsv", "", ds.entities), DuplicateKey);
  write_file(dir / "unk.tsv", "zz\tx\n");
  EXPECT_THROW(load_text_assets(dir / "unk.tsv", "", ds.entities), UnknownEntity);
}

TEST(NationsTest, BundledCounts) {
  Dataset ds = load_dataset(testing::data_path("nations/train.txt"), testing::data_path("nations/valid.txt"),
                            testing::data_path("nations/test.txt"));
  EXPECT_EQ(ds.entities.size(), 14u);
  EXPECT_EQ(ds.num_base_relations, 55u);
  EXPECT_EQ(ds.relations.size(), 110u);
  EXPECT_EQ(ds.num_raw_train, 1592u);
  EXPECT_EQ(ds.train.size(), 3184u);
  EXPECT_EQ(ds.valid.size(), 199u);
  EXPECT_EQ(ds.test.size(), 201u);
}

}  // namespace
}  // namespace hkge
