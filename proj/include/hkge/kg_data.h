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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hkge {

// Suffix reserved for synthesized inverse relation labels.
inline constexpr std::string_view kInverseSuffix = "__inv";

// Dense, first-appearance-ordered mapping between labels and indices.
class Vocabulary {
 public:
  // Returns the index of `label`, inserting it if unseen.
  std::size_t intern(const std::string& label);
  std::optional<std::size_t> find(std::string_view label) const;
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

  bool operator==(const Vocabulary& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Triple {
  std::size_t head;
  std::size_t relation;
  std::size_t tail;
  bool operator==(const Triple&) const = default;
};

// (head, relation) -> sorted true tails across every split, with inverse
// triples included so that head queries (t, r^-1, ?) are served directly.
class FilterIndex {
 public:
  FilterIndex() = default;
  FilterIndex(std::size_t num_relations, std::span<const std::span<const Triple>> splits);

  // Empty span for unseen (head, relation) pairs.
  std::span<const std::size_t> tails(std::size_t head, std::size_t relation) const;
  bool contains(std::size_t head, std::size_t relation, std::size_t tail) const;

 private:
  std::size_t num_relations_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> tails_;
};

enum class Split { kTrain, kValid, kTest };
std::string_view to_string(Split split);
Split parse_split(std::string_view name);

// An immutable knowledge graph. Relation indices [0, R) are the base
// relations in first-appearance order; index r + R is the inverse of r.
struct Dataset {
  Vocabulary entities;
  Vocabulary relations;
  std::size_t num_base_relations = 0;
  std::size_t num_raw_train = 0;
  // Raw training triples followed by their inverses (t, r^-1, h).
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  FilterIndex filter;

  std::size_t inverse(std::size_t relation) const {
    return relation < num_base_relations ? relation + num_base_relations
                                         : relation - num_base_relations;
  }
  const std::vector<Triple>& split(Split which) const;
};

// Reads three TAB-separated triple files. Vocabularies come from the training
// split; valid/test may only reference known labels. An empty valid or test
// path gives an empty split.
Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& valid_path,
                     const std::filesystem::path& test_path);

// Builds the filter over train (augmented), valid, test and the inverses of
// valid and test.
FilterIndex build_filter(const Dataset& dataset);

struct CoverageReport {
  std::size_t covered = 0;
  std::size_t total = 0;
  std::vector<std::string> missing;
  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(covered) / total; }
};

struct TextAssets {
  std::unordered_map<std::size_t, std::string> names;
  std::unordered_map<std::size_t, std::string> descriptions;
  CoverageReport name_coverage;
  CoverageReport description_coverage;
};

// Loads entity<TAB>text files (either path may be empty to skip it). Escaped
// "\t", "\n" and "\\" inside the text are decoded.
TextAssets load_text_assets(const std::filesystem::path& names_path,
                            const std::filesystem::path& descriptions_path,
                            const Vocabulary& entities);

// Rule-based splitter: a sentence ends at '.', '?' or '!' followed by
// whitespace or end of text. Empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Splits a line on TAB, dropping a trailing '\r'.
std::vector<std::string_view> split_tabs(std::string_view line);

}  // namespace hkge
