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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hkge/kg_data.h"
#include "hkge/model.h"

namespace hkge {

using PartMatrix = std::array<std::array<double, 4>, 4>;

// Cosine of two equal-length vectors; 0 when either is the zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

// Entry (i, j) is the cosine between block i of `query` and block j of
// `tail`; both are 4*dim values laid out s, x, y, z.
PartMatrix part_cosines(std::span<const double> query, std::span<const double> tail, std::size_t dim);

// Mean of part_cosines(query(h, r), rep(t)) over the split's triples in the
// tail direction. Requires a four-block model (not TransE).
PartMatrix part_cosine_matrix(const Model& model, const Dataset& dataset, Split split,
                              std::size_t threads = 1);

inline constexpr std::size_t kMaxShapleyPlayers = 20;

// Exact Shapley values of the game `value` on m players. value(mask) gets a
// bitmask of the coalition (bit i = player i). Coalition values are computed
// once each; throws TooManyPlayers when m > kMaxShapleyPlayers.
std::vector<double> exact_shapley(std::size_t m, const std::function<double(std::uint32_t)>& value,
                                  std::size_t threads = 1);

// Mean of the selected sentence vectors; the zero vector for an empty subset.
std::vector<double> mean_aggregate(std::span<const std::vector<double>> sentences, std::uint32_t mask,
                                   std::size_t dim);

// Shapley importance of each sentence when v(S) = score_fn(aggregator(S)).
std::vector<double> shapley_sentence_importance(
    const std::function<double(std::span<const double>)>& score_fn,
    std::span<const std::vector<double>> sentences, std::size_t dim,
    const std::function<std::vector<double>(std::span<const std::vector<double>>, std::uint32_t,
                                            std::size_t)>& aggregator = mean_aggregate,
    std::size_t threads = 1);

struct SentenceAttribution {
  std::size_t sentence_index = 0;
  std::string source;  // "head" or "tail"
  double phi = 0.0;
  std::size_t rank = 0;  // 1 = most important
};

struct TripleAttribution {
  Triple triple;
  std::size_t slot = 0;  // text slot whose sentences are the players
  double full_score = 0.0;
  double empty_score = 0.0;
  std::vector<SentenceAttribution> sentences;  // sorted by rank
};

// Players are the head's and the tail's sentences in text slot `slot`. A
// coalition replaces both entities' slot input by the mean of their selected
// sentences (zero when none are selected).
TripleAttribution attribute_triple(const Model& model, const Triple& triple, std::size_t slot,
                                   std::size_t threads = 1);

// First slot whose table carries per-sentence vectors; throws ConfigError
// when there is none.
std::size_t sentence_slot(const Model& model);

std::string cosine_json(const PartMatrix& m);
std::string cosine_table(const PartMatrix& m);
std::string attribution_json(const TripleAttribution& a, const Dataset& dataset);
std::string attribution_table(const TripleAttribution& a, const Dataset& dataset);

inline constexpr std::string_view kExportSourceId = "hkge-export";

// Writes every entity representation in the embedding file format with
// source "hkge-export" and dim equal to the model width.
void export_embeddings(const Model& model, const Vocabulary& entities, const std::filesystem::path& path);

}  // namespace hkge
