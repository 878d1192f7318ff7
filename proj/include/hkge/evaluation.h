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
#include <span>
#include <string>
#include <vector>

#include "hkge/kg_data.h"
#include "hkge/model.h"

namespace hkge {

// Filtered rank of scores[target] among all candidates, skipping the ones in
// `filtered` (sorted) other than the target itself. Ties count half, so the
// rank is 1 + #better + #tied / 2. Higher scores are better.
double filtered_rank(std::span<const double> scores, std::size_t target,
                     std::span<const std::size_t> filtered);

struct Metrics {
  std::size_t queries = 0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
};

// Summary over a list of ranks, accumulated in list order.
Metrics summarize_ranks(std::span<const double> ranks);

struct EvalReport {
  Metrics both;
  Metrics tail;  // (h, r, ?)
  Metrics head;  // (?, r, t), scored as (t, r^-1, ?)
  // Tail-query ranks for every split triple, followed by head-query ranks.
  std::vector<double> ranks;
};

// Filtered link prediction on one split in both directions.
EvalReport evaluate(const Model& model, const Dataset& dataset, Split split, std::size_t threads = 1);

// Ranks for arbitrary (head, relation, target) queries against `filter`.
std::vector<double> rank_queries(const Model& model, std::span<const Triple> queries,
                                 const FilterIndex& filter, std::size_t threads = 1);

std::string report_json(const EvalReport& report, std::string_view split);
std::string report_table(const EvalReport& report);

}  // namespace hkge
