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

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"
#include "hkge/parallel.h"

namespace hkge {

double filtered_rank(std::span<const double> scores, std::size_t target,
                     std::span<const std::size_t> filtered) {
  if (target >= scores.size()) {
    throw DimensionMismatch(fmt::format("target {} outside {} scores", target, scores.size()));
  }
  const double s = scores[target];
  if (!std::isfinite(s)) throw Diverged(fmt::format("non-finite score for target {}", target));
  std::size_t better = 0, tied = 0;
  auto skip = filtered.begin();
  for (std::size_t e = 0; e < scores.size(); ++e) {
    while (skip != filtered.end() && *skip < e) ++skip;
    if (e == target || (skip != filtered.end() && *skip == e)) continue;
    if (scores[e] > s) {
      ++better;
    } else if (scores[e] == s) {
      ++tied;
    }
  }
  return 1.0 + static_cast<double>(better) + 0.5 * static_cast<double>(tied);
}

Metrics summarize_ranks(std::span<const double> ranks) {
  Metrics m;
  m.queries = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1.0 : 0.0;
    m.hits3 += r <= 3.0 ? 1.0 : 0.0;
    m.hits10 += r <= 10.0 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

std::vector<double> rank_queries(const Model& model, std::span<const Triple> queries,
                                 const FilterIndex& filter, std::size_t threads) {
  std::vector<EntityState> states(model.num_entities());
  parallel_for(states.size(), threads, [&](std::size_t e) { states[e] = model.entity_state(e); });
  std::vector<double> ranks(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    const Triple& q = queries[i];
    const auto scores = model.score_all_tails(q.head, q.relation, states);
    ranks[i] = filtered_rank(scores, q.tail, filter.tails(q.head, q.relation));
  });
  return ranks;
}

EvalReport evaluate(const Model& model, const Dataset& dataset, Split split, std::size_t threads) {
  const auto& triples = dataset.split(split);
  std::vector<Triple> queries;
  queries.reserve(2 * triples.size());
  for (const Triple& t : triples) queries.push_back(t);
  for (const Triple& t : triples) queries.push_back({t.tail, dataset.inverse(t.relation), t.head});

  EvalReport report;
  report.ranks = rank_queries(model, queries, dataset.filter, threads);
  const std::span<const double> all(report.ranks);
  report.both = summarize_ranks(all);
  report.tail = summarize_ranks(all.first(triples.size()));
  report.head = summarize_ranks(all.subspan(triples.size()));
  return report;
}

std::string report_json(const EvalReport& report, std::string_view split) {
  auto metrics = [](const Metrics& m) {
    return nlohmann::ordered_json{{"queries", m.queries}, {"mrr", m.mrr},       {"hits@1", m.hits1},
                                  {"hits@3", m.hits3},    {"hits@10", m.hits10}};
  };
  nlohmann::ordered_json j;
  j["split"] = split;
  j["both"] = metrics(report.both);
  j["tail"] = metrics(report.tail);
  j["head"] = metrics(report.head);
  return j.dump(2);
}

std::string report_table(const EvalReport& report) {
  std::string out = fmt::format("{:<10}{:>9}{:>9}{:>9}{:>9}{:>9}\n", "direction", "queries", "MRR", "H@1",
                                "H@3", "H@10");
  auto row = [&](std::string_view name, const Metrics& m) {
    out += fmt::format("{:<10}{:>9}{:>9.4f}{:>9.4f}{:>9.4f}{:>9.4f}\n", name, m.queries, m.mrr, m.hits1,
                       m.hits3, m.hits10);
  };
  row("both", report.both);
  row("tail", report.tail);
  row("head", report.head);
  return out;
}

}  // namespace hkge
