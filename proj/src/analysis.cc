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

#include "hkge/analysis.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"
#include "hkge/parallel.h"

namespace hkge {
namespace {

constexpr const char* kPartNames[4] = {"s", "x", "y", "z"};

// 1 / (m * C(m-1, s)) = s! (m-s-1)! / m!
std::vector<double> shapley_weights(std::size_t m) {
  std::vector<double> w(m);
  double binom = 1.0;
  for (std::size_t s = 0; s < m; ++s) {
    w[s] = 1.0 / (static_cast<double>(m) * binom);
    binom = binom * static_cast<double>(m - 1 - s) / static_cast<double>(s + 1);
  }
  return w;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

PartMatrix part_cosines(std::span<const double> query, std::span<const double> tail, std::size_t dim) {
  if (query.size() != 4 * dim || tail.size() != 4 * dim) {
    throw DimensionMismatch(fmt::format("part cosines need 4*{} values per vector", dim));
  }
  PartMatrix m{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) m[i][j] = cosine(query.subspan(i * dim, dim), tail.subspan(j * dim, dim));
  }
  return m;
}

PartMatrix part_cosine_matrix(const Model& model, const Dataset& dataset, Split split, std::size_t threads) {
  if (model.layout().width != 4 * model.spec().dim) {
    throw ConfigError(fmt::format("part cosines need a four-part model, not {}", to_string(model.spec().kind)));
  }
  const auto& triples = dataset.split(split);
  PartMatrix mean{};
  if (triples.empty()) return mean;
  std::vector<EntityState> states(model.num_entities());
  parallel_for(states.size(), threads, [&](std::size_t e) { states[e] = model.entity_state(e); });
  std::vector<PartMatrix> each(triples.size());
  parallel_for(triples.size(), threads, [&](std::size_t i) {
    QueryState qs;
    model.query_forward(states[triples[i].head], triples[i].relation, qs);
    each[i] = part_cosines(qs.q, states[triples[i].tail].rep, model.spec().dim);
  });
  for (const PartMatrix& m : each) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) mean[i][j] += m[i][j];
    }
  }
  for (auto& row : mean) {
    for (double& v : row) v /= static_cast<double>(triples.size());
  }
  return mean;
}

std::vector<double> exact_shapley(std::size_t m, const std::function<double(std::uint32_t)>& value,
                                  std::size_t threads) {
  if (m > kMaxShapleyPlayers) {
    throw TooManyPlayers(fmt::format("{} players exceed the exact enumeration limit of {}", m, kMaxShapleyPlayers));
  }
  if (m == 0) return {};
  const std::uint32_t n_masks = std::uint32_t{1} << m;
  std::vector<double> v(n_masks);
  parallel_for(n_masks, threads, [&](std::size_t mask) { v[mask] = value(static_cast<std::uint32_t>(mask)); });
  const auto w = shapley_weights(m);
  std::vector<double> phi(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t bit = std::uint32_t{1} << i;
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      phi[i] += w[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
  }
  return phi;
}

std::vector<double> mean_aggregate(std::span<const std::vector<double>> sentences, std::uint32_t mask,
                                   std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!(mask >> i & 1u)) continue;
    if (sentences[i].size() != dim) throw DimensionMismatch("sentence vector length differs from dim");
    for (std::size_t d = 0; d < dim; ++d) out[d] += sentences[i][d];
    ++count;
  }
  if (count > 0) {
    for (double& x : out) x /= static_cast<double>(count);
  }
  return out;
}

std::vector<double> shapley_sentence_importance(
    const std::function<double(std::span<const double>)>& score_fn,
    std::span<const std::vector<double>> sentences, std::size_t dim,
    const std::function<std::vector<double>(std::span<const std::vector<double>>, std::uint32_t,
                                            std::size_t)>& aggregator,
    std::size_t threads) {
  if (sentences.empty()) throw ConfigError("Shapley attribution needs at least one sentence");
  return exact_shapley(
      sentences.size(), [&](std::uint32_t mask) { return score_fn(aggregator(sentences, mask, dim)); }, threads);
}

std::size_t sentence_slot(const Model& model) {
  for (std::size_t s = 0; s < model.num_slots(); ++s) {
    if (!model.text().slots[s]->sentence_vectors.empty()) return s;
  }
  throw ConfigError("no text table of this model carries per-sentence vectors");
}

TripleAttribution attribute_triple(const Model& model, const Triple& triple, std::size_t slot,
                                   std::size_t threads) {
  if (model.spec().kind == ModelKind::kTransEConcat) {
    throw ConfigError("sentence attribution needs a model that reads text slots directly");
  }
  if (slot >= model.num_slots()) {
    throw ConfigError(fmt::format("text slot {} out of range ({} slots)", slot, model.num_slots()));
  }
  const TextTable& table = *model.text().slots[slot];
  auto sentences_of = [&](std::size_t e) -> std::span<const std::vector<double>> {
    auto it = table.sentence_vectors.find(e);
    if (it == table.sentence_vectors.end()) return {};
    return it->second;
  };
  const auto head_sents = sentences_of(triple.head);
  const auto tail_sents = sentences_of(triple.tail);
  const std::size_t m = head_sents.size() + tail_sents.size();
  if (m == 0) throw DataError("neither entity has sentence vectors in the chosen text table");
  if (m > kMaxShapleyPlayers) {
    throw TooManyPlayers(fmt::format("{} sentences exceed the exact enumeration limit of {}", m, kMaxShapleyPlayers));
  }
  const std::uint32_t head_mask = (std::uint32_t{1} << head_sents.size()) - 1;
  auto value = [&](std::uint32_t mask) {
    TextOverrides overrides;
    overrides[triple.head][slot] = mean_aggregate(head_sents, mask & head_mask, table.dim);
    if (triple.tail != triple.head) {
      overrides[triple.tail][slot] = mean_aggregate(tail_sents, mask >> head_sents.size(), table.dim);
    }
    return model.score_states(model.entity_state(triple.head, &overrides), triple.head, triple.relation,
                              model.entity_state(triple.tail, &overrides), triple.tail);
  };
  TripleAttribution out;
  out.triple = triple;
  out.slot = slot;
  const auto phi = exact_shapley(m, value, threads);
  out.full_score = value((std::uint32_t{1} << m) - 1);
  out.empty_score = value(0);
  for (std::size_t i = 0; i < m; ++i) {
    const bool is_head = i < head_sents.size();
    out.sentences.push_back({is_head ? i : i - head_sents.size(), is_head ? "head" : "tail", phi[i], 0});
  }
  std::stable_sort(out.sentences.begin(), out.sentences.end(),
                   [](const auto& a, const auto& b) { return a.phi > b.phi; });
  for (std::size_t i = 0; i < out.sentences.size(); ++i) out.sentences[i].rank = i + 1;
  return out;
}

std::string cosine_json(const PartMatrix& m) {
  nlohmann::ordered_json j;
  j["parts"] = {"s", "x", "y", "z"};
  j["rows"] = "query";
  j["cols"] = "tail";
  j["matrix"] = nlohmann::ordered_json::array();
  for (const auto& row : m) j["matrix"].push_back(row);
  return j.dump(2);
}

std::string cosine_table(const PartMatrix& m) {
  std::string out = fmt::format("{:<12}", "query\\tail");
  for (const char* n : kPartNames) out += fmt::format("{:>10}", n);
  out += "\n";
  for (std::size_t i = 0; i < 4; ++i) {
    out += fmt::format("{:<12}", kPartNames[i]);
    for (double v : m[i]) out += fmt::format("{:>10.4f}", v);
    out += "\n";
  }
  return out;
}

std::string attribution_json(const TripleAttribution& a, const Dataset& dataset) {
  nlohmann::ordered_json j;
  j["head"] = dataset.entities.label(a.triple.head);
  j["relation"] = dataset.relations.label(a.triple.relation);
  j["tail"] = dataset.entities.label(a.triple.tail);
  j["slot"] = a.slot;
  j["full_score"] = a.full_score;
  j["empty_score"] = a.empty_score;
  j["sentences"] = nlohmann::ordered_json::array();
  for (const auto& s : a.sentences) {
    j["sentences"].push_back(
        {{"sentence_index", s.sentence_index}, {"source", s.source}, {"phi", s.phi}, {"rank", s.rank}});
  }
  return j.dump(2);
}

std::string attribution_table(const TripleAttribution& a, const Dataset& dataset) {
  std::string out = fmt::format("({}, {}, {})  score {:.6f}  empty {:.6f}\n", dataset.entities.label(a.triple.head),
                                dataset.relations.label(a.triple.relation), dataset.entities.label(a.triple.tail),
                                a.full_score, a.empty_score);
  out += fmt::format("{:>5}{:>8}{:>10}{:>14}\n", "rank", "source", "sentence", "phi");
  for (const auto& s : a.sentences) {
    out += fmt::format("{:>5}{:>8}{:>10}{:>14.6f}\n", s.rank, s.source, s.sentence_index, s.phi);
  }
  return out;
}

void export_embeddings(const Model& model, const Vocabulary& entities, const std::filesystem::path& path) {
  if (entities.size() != model.num_entities()) {
    throw DimensionMismatch(fmt::format("vocabulary has {} entities, model has {}", entities.size(),
                                        model.num_entities()));
  }
  std::vector<double> current;
  write_text_table(path, kExportSourceId, model.layout().width, entities, [&](std::size_t e) {
    current = model.entity_state(e).rep;
    return std::span<const double>(current);
  });
}

}  // namespace hkge
