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

#include "hkge/model.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "hkge/error.h"

namespace hkge {
namespace {

enum class ConcatKind { kWord, kFastText, kDoc, kSentence, kUnknown };

ConcatKind concat_kind(std::string_view source) {
  if (source == "word2vec" || source == "word") return ConcatKind::kWord;
  if (source == "fasttext") return ConcatKind::kFastText;
  if (source == "doc2vec" || source == "doc") return ConcatKind::kDoc;
  if (source == "sentence") return ConcatKind::kSentence;
  return ConcatKind::kUnknown;
}

std::shared_ptr<const TextTable> build_concat_table(const ConcatSources& sources) {
  auto table = std::make_shared<TextTable>();
  table->source_id = "concat";
  const TextTable* parts[] = {sources.word.get(), sources.fasttext.get(), sources.doc.get(),
                              sources.sentence.get()};
  const std::size_t n = parts[0]->num_entities();
  for (const TextTable* p : parts) {
    if (p->num_entities() != n) throw ConfigError("concat tables cover different entity counts");
    table->dim += p->dim;
  }
  table->vectors.reserve(n * table->dim);
  table->present.assign(n, true);
  for (std::size_t e = 0; e < n; ++e) {
    auto row = concat_features(sources, e);
    table->vectors.insert(table->vectors.end(), row.begin(), row.end());
    for (const TextTable* p : parts) table->present[e] = table->present[e] && p->present[e];
  }
  return table;
}

void add_into(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Text rotors of entities without text can vanish. Such indices rotate by
// the identity and record norm 0 so that backward skips them.
void normalize_rotor(std::span<const double> v, std::span<double> unit, std::span<double> norms) {
  const std::size_t n = norms.size();
  for (std::size_t d = 0; d < n; ++d) {
    double sq = 0.0;
    for (std::size_t k = 0; k < 4; ++k) sq += v[k * n + d] * v[k * n + d];
    const double norm = std::sqrt(sq);
    if (norm < kNormEpsilon) {
      norms[d] = 0.0;
      for (std::size_t k = 0; k < 4; ++k) unit[k * n + d] = k == 0 ? 1.0 : 0.0;
      continue;
    }
    norms[d] = norm;
    for (std::size_t k = 0; k < 4; ++k) unit[k * n + d] = v[k * n + d] / norm;
  }
}

void normalize_rotor_backward(std::span<const double> unit, std::span<const double> norms,
                              std::span<const double> grad_out, std::span<double> grad_v) {
  const std::size_t n = norms.size();
  for (std::size_t d = 0; d < n; ++d) {
    if (norms[d] == 0.0) continue;
    double dot = 0.0;
    for (std::size_t k = 0; k < 4; ++k) dot += unit[k * n + d] * grad_out[k * n + d];
    for (std::size_t k = 0; k < 4; ++k) {
      grad_v[k * n + d] += (grad_out[k * n + d] - unit[k * n + d] * dot) / norms[d];
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTetra: return "tetra";
    case ModelKind::kRobin: return "robin";
    case ModelKind::kLion: return "lion";
    case ModelKind::kTetraZero: return "tetra_zero";
    case ModelKind::kTransE: return "transe";
    case ModelKind::kTransEConcat: return "transe_concat";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::kTetra, ModelKind::kRobin, ModelKind::kLion, ModelKind::kTetraZero,
                      ModelKind::kTransE, ModelKind::kTransEConcat}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format(
      "unknown model '{}' (expected tetra|robin|lion|tetra_zero|transe|transe_concat)", name));
}

std::string_view to_string(DistanceKind kind) { return kind == DistanceKind::kSquared ? "squared" : "plain"; }

DistanceKind parse_distance(std::string_view name) {
  if (name == "squared") return DistanceKind::kSquared;
  if (name == "plain") return DistanceKind::kPlain;
  throw ConfigError(fmt::format("unknown distance '{}' (expected squared|plain)", name));
}

ConcatSources classify_concat_sources(std::span<const std::shared_ptr<const TextTable>> tables) {
  ConcatSources out;
  for (const auto& t : tables) {
    if (!t) throw ConfigError("missing text table for concatenation");
    std::shared_ptr<const TextTable>* slot = nullptr;
    switch (concat_kind(t->source_id)) {
      case ConcatKind::kWord: slot = &out.word; break;
      case ConcatKind::kFastText: slot = &out.fasttext; break;
      case ConcatKind::kDoc: slot = &out.doc; break;
      case ConcatKind::kSentence: slot = &out.sentence; break;
      case ConcatKind::kUnknown:
        throw ConfigError(fmt::format("source '{}' is not one of word2vec, fasttext, doc2vec, sentence",
                                      t->source_id));
    }
    if (*slot) throw ConfigError(fmt::format("source kind of '{}' given twice", t->source_id));
    *slot = t;
  }
  if (!out.word || !out.fasttext || !out.doc || !out.sentence) {
    throw ConfigError("concatenation needs word2vec, fasttext, doc2vec and sentence tables");
  }
  return out;
}

std::vector<double> concat_features(const ConcatSources& sources, std::size_t entity) {
  std::vector<double> out;
  for (const auto* table : {&sources.word, &sources.fasttext, &sources.doc, &sources.sentence}) {
    if (!*table) throw ConfigError("concatenation needs word2vec, fasttext, doc2vec and sentence tables");
    auto row = (*table)->vector(entity);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out = {&graph_entity, &relation, &bias_head, &bias_tail};
  for (Adjuster& a : adjusters) {
    for (Tensor* t : a.tensors()) out.push_back(t);
  }
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  std::vector<const Tensor*> out = {&graph_entity, &relation, &bias_head, &bias_tail};
  for (const Adjuster& a : adjusters) {
    for (const Tensor* t : a.tensors()) out.push_back(t);
  }
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out = *this;
  for (Tensor* t : out.tensors()) std::fill(t->data.begin(), t->data.end(), 0.0);
  return out;
}

ModelLayout make_layout(const ModelSpec& spec, std::size_t num_slots) {
  auto require_slots = [&](std::size_t lo, std::size_t hi) {
    if (num_slots < lo || num_slots > hi) {
      throw ConfigError(fmt::format("model {} needs {}{} text tables, got {}", to_string(spec.kind), lo,
                                    hi == lo ? "" : fmt::format("-{}", hi), num_slots));
    }
  };
  const std::size_t D = spec.dim;
  if (D == 0) throw ConfigError("dim must be >= 1");
  ModelLayout l;
  auto graph = [](std::size_t i) { return BlockSource{BlockSource::Kind::kGraph, i}; };
  auto adj = [](std::size_t i) { return BlockSource{BlockSource::Kind::kAdjuster, i}; };
  switch (spec.kind) {
    case ModelKind::kTetraZero:
      require_slots(0, 0);
      l = {QueryForm::kRotation, 4 * D, 4, {graph(0), graph(1), graph(2), graph(3)}, {}, {}, {}};
      break;
    case ModelKind::kTetra: {
      require_slots(1, 3);
      l = {QueryForm::kRotation, 4 * D, 1, {graph(0)}, {}, {}, {}};
      const char* block_names[] = {"x", "y", "z"};
      for (std::size_t k = 0; k < 3; ++k) {
        if (k < num_slots) {
          l.rep.push_back(adj(l.adjuster_slot.size()));
          l.adjuster_slot.push_back(k);
          l.adjuster_names.push_back(fmt::format("tetra.{}", block_names[k]));
        } else {
          l.rep.push_back(graph(l.graph_blocks++));
        }
      }
      break;
    }
    case ModelKind::kRobin:
    case ModelKind::kLion: {
      require_slots(2, 2);
      l = {QueryForm::kRotorTranslation, 4 * D, 4, {graph(0), graph(1), graph(2), graph(3)},
           {0, 1, 2, 3}, {0, 0, 1, 1}, {}};
      if (spec.kind == ModelKind::kRobin) {
        l.adjuster_names = {"robin.name_s", "robin.name_x", "robin.desc_y", "robin.desc_z"};
      } else {
        l.adjuster_names = {"lion.t1_s", "lion.t1_x", "lion.t2_y", "lion.t2_z"};
      }
      break;
    }
    case ModelKind::kTransE:
      require_slots(0, 0);
      l = {QueryForm::kTranslation, D, 1, {graph(0)}, {}, {}, {}};
      break;
    case ModelKind::kTransEConcat:
      require_slots(4, 4);
      l = {QueryForm::kTranslation, D, 0, {adj(0)}, {}, {0}, {"concat"}};
      break;
  }
  return l;
}

Model::Model(ModelSpec spec, std::size_t num_entities, std::size_t num_relations, TextInputs text)
    : spec_(spec),
      num_entities_(num_entities),
      num_relations_(num_relations),
      text_(std::move(text)),
      layout_(make_layout(spec_, text_.slots.size())) {
  inputs_ = text_.slots;
  if (spec_.kind == ModelKind::kTransEConcat) {
    inputs_ = {build_concat_table(classify_concat_sources(text_.slots))};
  }
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (!inputs_[i]) throw ConfigError(fmt::format("text slot {} is empty", i));
    if (inputs_[i]->num_entities() != num_entities) {
      throw ConfigError(fmt::format("text table '{}' covers {} entities, dataset has {}",
                                    inputs_[i]->source_id, inputs_[i]->num_entities(), num_entities));
    }
  }
  const std::size_t D = spec_.dim;
  params_.graph_entity = Tensor("graph_entity", num_entities, layout_.graph_blocks * D);
  params_.relation = Tensor("relation", num_relations, layout_.width);
  params_.bias_head = Tensor("bias_head", num_entities, 1);
  params_.bias_tail = Tensor("bias_tail", num_entities, 1);
  for (std::size_t a = 0; a < layout_.adjuster_slot.size(); ++a) {
    params_.adjusters.emplace_back("adjuster." + layout_.adjuster_names[a],
                                   inputs_[layout_.adjuster_slot[a]]->dim, spec_.hidden_width(), D);
  }
}

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gaussian(0.0, spec_.init_scale);
  for (double& v : params_.graph_entity.data) v = gaussian(rng);
  if (layout_.form == QueryForm::kTranslation) {
    for (double& v : params_.relation.data) v = gaussian(rng);
  } else {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (double& v : params_.relation.data) v = uniform(rng);
  }
  std::fill(params_.bias_head.data.begin(), params_.bias_head.data.end(), 0.0);
  std::fill(params_.bias_tail.data.begin(), params_.bias_tail.data.end(), 0.0);
  for (Adjuster& a : params_.adjusters) a.init_glorot(rng);
}

std::span<const double> Model::raw_text(std::size_t entity, std::size_t slot,
                                        const TextOverrides* overrides) const {
  if (overrides) {
    auto it = overrides->find(entity);
    if (it != overrides->end()) {
      auto jt = it->second.find(slot);
      if (jt != it->second.end()) return jt->second;
    }
  }
  return inputs_.at(slot)->vector(entity);
}

EntityState Model::entity_state(std::size_t entity, const TextOverrides* overrides) const {
  if (entity >= num_entities_) {
    throw UnknownEntity(fmt::format("entity index {} out of range ({} entities)", entity, num_entities_));
  }
  const std::size_t D = spec_.dim;
  EntityState st;
  const std::size_t n_adj = params_.adjusters.size();
  st.hidden.resize(n_adj);
  st.out.resize(n_adj);
  for (std::size_t a = 0; a < n_adj; ++a) {
    const Adjuster& adj = params_.adjusters[a];
    st.hidden[a].resize(adj.hidden_dim());
    st.out[a].resize(adj.output_dim());
    adj.forward(raw_text(entity, layout_.adjuster_slot[a], overrides), st.hidden[a], st.out[a]);
  }
  st.rep.resize(layout_.width);
  const auto graph_row = params_.graph_entity.row(entity);
  for (std::size_t k = 0; k < layout_.rep.size(); ++k) {
    const BlockSource& src = layout_.rep[k];
    std::span<const double> block = src.kind == BlockSource::Kind::kGraph
                                        ? graph_row.subspan(src.index * D, D)
                                        : std::span<const double>(st.out[src.index]);
    std::copy(block.begin(), block.end(), st.rep.begin() + k * D);
  }
  if (!layout_.rotor.empty()) {
    st.aux.resize(4 * D);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& block = st.out[layout_.rotor[k]];
      std::copy(block.begin(), block.end(), st.aux.begin() + k * D);
    }
  }
  return st;
}

std::vector<EntityState> Model::all_entity_states() const {
  std::vector<EntityState> out;
  out.reserve(num_entities_);
  for (std::size_t e = 0; e < num_entities_; ++e) out.push_back(entity_state(e));
  return out;
}

void Model::query_forward(const EntityState& head, std::size_t relation, QueryState& st) const {
  if (relation >= num_relations_) {
    throw ConfigError(fmt::format("relation index {} out of range ({} relations)", relation, num_relations_));
  }
  const std::size_t W = layout_.width;
  const auto rel = params_.relation.row(relation);
  st.q.assign(W, 0.0);
  if (layout_.form == QueryForm::kTranslation) {
    for (std::size_t i = 0; i < W; ++i) st.q[i] = head.rep[i] + rel[i];
    return;
  }
  const std::size_t D = spec_.dim;
  st.rel_unit.resize(W);
  st.rel_norms.resize(D);
  hc::normalize(rel, st.rel_unit, st.rel_norms);
  if (layout_.form == QueryForm::kRotation) {
    hc::hmul(spec_.algebra, head.rep, st.rel_unit, st.q);
    return;
  }
  st.aux_unit.resize(W);
  st.aux_norms.resize(D);
  normalize_rotor(head.aux, st.aux_unit, st.aux_norms);
  hc::hmul(spec_.algebra, head.rep, st.aux_unit, st.q);
  for (std::size_t i = 0; i < W; ++i) st.q[i] += head.aux[i] + st.rel_unit[i];
}

void Model::query_backward(const EntityState& head, std::size_t relation, const QueryState& st,
                           std::span<const double> grad_q, std::span<double> grad_rep,
                           std::span<double> grad_aux, std::span<double> grad_relation) const {
  const std::size_t W = layout_.width;
  if (layout_.form == QueryForm::kTranslation) {
    add_into(grad_rep, grad_q);
    add_into(grad_relation, grad_q);
    return;
  }
  if (layout_.form == QueryForm::kRotation) {
    std::vector<double> grad_unit(W, 0.0);
    hc::hmul_backward(spec_.algebra, head.rep, st.rel_unit, grad_q, grad_rep, grad_unit);
    hc::normalize_backward(st.rel_unit, st.rel_norms, grad_unit, grad_relation);
    return;
  }
  (void)relation;
  std::vector<double> grad_unit(W, 0.0);
  hc::hmul_backward(spec_.algebra, head.rep, st.aux_unit, grad_q, grad_rep, grad_unit);
  normalize_rotor_backward(st.aux_unit, st.aux_norms, grad_unit, grad_aux);
  add_into(grad_aux, grad_q);
  hc::normalize_backward(st.rel_unit, st.rel_norms, grad_q, grad_relation);
}

void Model::entity_backward(std::size_t entity, const EntityState& st, std::span<const double> grad_rep,
                            std::span<const double> grad_aux, ModelParams& grads,
                            const TextOverrides* overrides) const {
  entity_backward(entity, st, grad_rep, grad_aux, grads.graph_entity.row(entity), grads.adjusters, overrides);
}

void Model::entity_backward(std::size_t entity, const EntityState& st, std::span<const double> grad_rep,
                            std::span<const double> grad_aux, std::span<double> graph_row,
                            std::span<Adjuster> grad_adjusters, const TextOverrides* overrides) const {
  const std::size_t D = spec_.dim;
  std::vector<std::vector<double>> grad_out(params_.adjusters.size());
  for (std::size_t a = 0; a < grad_out.size(); ++a) grad_out[a].assign(D, 0.0);
  bool any_adjuster = false;

  for (std::size_t k = 0; k < layout_.rep.size(); ++k) {
    const BlockSource& src = layout_.rep[k];
    auto g = grad_rep.subspan(k * D, D);
    if (src.kind == BlockSource::Kind::kGraph) {
      add_into(graph_row.subspan(src.index * D, D), g);
    } else {
      add_into(grad_out[src.index], g);
      any_adjuster = true;
    }
  }
  if (!layout_.rotor.empty() && !grad_aux.empty()) {
    for (std::size_t k = 0; k < 4; ++k) add_into(grad_out[layout_.rotor[k]], grad_aux.subspan(k * D, D));
    any_adjuster = true;
  }
  if (!any_adjuster) return;
  for (std::size_t a = 0; a < grad_out.size(); ++a) {
    params_.adjusters[a].backward(raw_text(entity, layout_.adjuster_slot[a], overrides), st.hidden[a],
                                  st.out[a], grad_out[a], grad_adjusters[a], {});
  }
}

double Model::distance(std::span<const double> q, std::span<const double> tail) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double diff = q[i] - tail[i];
    acc += diff * diff;
  }
  return spec_.distance == DistanceKind::kSquared ? acc : std::sqrt(acc);
}

void Model::distance_backward(std::span<const double> q, std::span<const double> tail, double coef,
                              std::span<double> grad_q, std::span<double> grad_tail) const {
  // score = -distance, so d(score)/dq = -d(distance)/dq.
  double scale = -2.0 * coef;
  if (spec_.distance == DistanceKind::kPlain) {
    scale = -coef / std::max(distance(q, tail), kNormEpsilon);
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double g = scale * (q[i] - tail[i]);
    grad_q[i] += g;
    if (!grad_tail.empty()) grad_tail[i] -= g;
  }
}

double Model::score_states(const EntityState& head, std::size_t head_index, std::size_t relation,
                           const EntityState& tail, std::size_t tail_index) const {
  QueryState qs;
  query_forward(head, relation, qs);
  return -distance(qs.q, tail.rep) + params_.bias_head.data[head_index] + params_.bias_tail.data[tail_index];
}

HVec Model::entity_rep(std::size_t entity) const {
  EntityState st = entity_state(entity);
  if (layout_.width == 4 * spec_.dim) return HVec::from_flat(spec_.algebra, st.rep);
  HVec out(spec_.algebra, spec_.dim);
  std::copy(st.rep.begin(), st.rep.end(), out.block(0).begin());
  return out;
}

HVec Model::relation_rep(std::size_t relation) const {
  if (relation >= num_relations_) {
    throw ConfigError(fmt::format("relation index {} out of range ({} relations)", relation, num_relations_));
  }
  const auto row = params_.relation.row(relation);
  if (layout_.form == QueryForm::kTranslation) {
    HVec out(spec_.algebra, spec_.dim);
    std::copy(row.begin(), row.end(), out.block(0).begin());
    return out;
  }
  return normalize(HVec::from_flat(spec_.algebra, row));
}

Query Model::make_query(std::size_t head, std::size_t relation) const {
  QueryState qs;
  query_forward(entity_state(head), relation, qs);
  if (layout_.width == 4 * spec_.dim) return {HVec::from_flat(spec_.algebra, qs.q), head, relation};
  HVec q(spec_.algebra, spec_.dim);
  std::copy(qs.q.begin(), qs.q.end(), q.block(0).begin());
  return {q, head, relation};
}

double Model::score(std::size_t head, std::size_t relation, std::size_t tail) const {
  return score_states(entity_state(head), head, relation, entity_state(tail), tail);
}

std::vector<double> Model::score_all_tails(std::size_t head, std::size_t relation) const {
  return score_all_tails(head, relation, all_entity_states());
}

std::vector<double> Model::score_all_tails(std::size_t head, std::size_t relation,
                                           std::span<const EntityState> states) const {
  QueryState qs;
  query_forward(states[head], relation, qs);
  std::vector<double> out(num_entities_);
  const double bh = params_.bias_head.data[head];
  for (std::size_t t = 0; t < num_entities_; ++t) {
    out[t] = -distance(qs.q, states[t].rep) + bh + params_.bias_tail.data[t];
  }
  return out;
}

}  // namespace hkge
