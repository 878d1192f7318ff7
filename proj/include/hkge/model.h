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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hkge/hypercomplex.h"
#include "hkge/tensor.h"
#include "hkge/text_features.h"

namespace hkge {

enum class ModelKind { kTetra, kRobin, kLion, kTetraZero, kTransE, kTransEConcat };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

enum class DistanceKind { kSquared, kPlain };
std::string_view to_string(DistanceKind kind);
DistanceKind parse_distance(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kTetraZero;
  Algebra algebra = Algebra::kDihedron;
  std::size_t dim = 32;
  // Adjuster hidden width; 0 means "same as dim".
  std::size_t hidden = 0;
  DistanceKind distance = DistanceKind::kSquared;
  // Standard deviation of the Gaussian used for entity and translation
  // embeddings. Rotor relations are drawn from U(-1, 1) instead.
  double init_scale = 1e-3;

  std::size_t hidden_width() const { return hidden == 0 ? dim : hidden; }
};

// Text tables in the role order each model kind expects:
//   Tetra        1-3 tables feeding the x, y, z blocks in order
//   Robin        [entity-name table T0, description table T1]
//   Lion         [description table T1, description table T2]
//   TransEConcat the four word/fasttext/doc/sentence tables, any order
//   TetraZero, TransE: none
struct TextInputs {
  std::vector<std::shared_ptr<const TextTable>> slots;
};

// The four tables concatenated by TransE_Concat, in fixed W, F, D, S order.
struct ConcatSources {
  std::shared_ptr<const TextTable> word;
  std::shared_ptr<const TextTable> fasttext;
  std::shared_ptr<const TextTable> doc;
  std::shared_ptr<const TextTable> sentence;
};

// Sorts four tables into ConcatSources by their source ids
// (word2vec|word, fasttext, doc2vec|doc, sentence). Throws ConfigError when a
// kind is missing or repeated.
ConcatSources classify_concat_sources(std::span<const std::shared_ptr<const TextTable>> tables);

// [W | F | D | S] raw vectors of one entity; length is the sum of the dims.
std::vector<double> concat_features(const ConcatSources& sources, std::size_t entity);

// Trainable stores. Tensor order here is the order used by checkpoints and
// the optimizer.
struct ModelParams {
  Tensor graph_entity;  // num_entities x (graph blocks * D)
  Tensor relation;      // num_relations x width
  Tensor bias_head;     // num_entities x 1
  Tensor bias_tail;     // num_entities x 1
  std::vector<Adjuster> adjusters;

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  ModelParams zeros_like() const;
};

// Where each D-wide block of an entity representation comes from.
struct BlockSource {
  enum class Kind { kGraph, kAdjuster } kind;
  std::size_t index;  // graph block or adjuster index
};

enum class QueryForm {
  kRotation,          // q = h (x) r/|r|
  kRotorTranslation,  // q = h (x) a/|a| + a + r/|r|, a assembled from text
  kTranslation,       // q = h + r
};

struct ModelLayout {
  QueryForm form;
  std::size_t width;         // length of entity/query vectors (4D or D)
  std::size_t graph_blocks;  // D-blocks per entity in graph_entity
  std::vector<BlockSource> rep;
  std::vector<std::size_t> rotor;           // adjusters assembling the text rotor
  std::vector<std::size_t> adjuster_slot;   // input text slot per adjuster
  std::vector<std::string> adjuster_names;
};

ModelLayout make_layout(const ModelSpec& spec, std::size_t num_slots);

// Raw text vectors to use instead of the table rows for specific
// (entity, slot) pairs.
using TextOverrides = std::unordered_map<std::size_t, std::unordered_map<std::size_t, std::vector<double>>>;

// Forward values for one entity that both the head and tail roles reuse.
struct EntityState {
  std::vector<double> rep;  // width
  std::vector<double> aux;  // 4D unnormalized text rotor, empty if unused
  std::vector<std::vector<double>> hidden;  // per adjuster
  std::vector<std::vector<double>> out;     // per adjuster
};

struct QueryState {
  std::vector<double> q;
  std::vector<double> rel_unit, rel_norms;
  std::vector<double> aux_unit, aux_norms;
};

struct Query {
  HVec q;
  std::size_t head;
  std::size_t relation;
};

class Model {
 public:
  Model(ModelSpec spec, std::size_t num_entities, std::size_t num_relations, TextInputs text);

  // Seeded initialization of every tensor.
  void initialize(std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const ModelLayout& layout() const { return layout_; }
  const TextInputs& text() const { return text_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }

  HVec entity_rep(std::size_t entity) const;
  HVec relation_rep(std::size_t relation) const;
  Query make_query(std::size_t head, std::size_t relation) const;
  double score(std::size_t head, std::size_t relation, std::size_t tail) const;
  std::vector<double> score_all_tails(std::size_t head, std::size_t relation) const;

  // Lower-level pieces shared with training, evaluation and analysis.
  EntityState entity_state(std::size_t entity, const TextOverrides* overrides = nullptr) const;
  std::vector<EntityState> all_entity_states() const;
  void query_forward(const EntityState& head, std::size_t relation, QueryState& state) const;
  std::vector<double> score_all_tails(std::size_t head, std::size_t relation,
                                      std::span<const EntityState> states) const;
  double score_states(const EntityState& head, std::size_t head_index, std::size_t relation,
                      const EntityState& tail, std::size_t tail_index) const;
  // Distance between a query and a tail representation.
  double distance(std::span<const double> q, std::span<const double> tail) const;
  // Accumulates d(score)/dq scaled by `coef` into grad_q and the matching
  // tail gradient into grad_tail.
  void distance_backward(std::span<const double> q, std::span<const double> tail, double coef,
                         std::span<double> grad_q, std::span<double> grad_tail) const;
  // Backpropagates dL/dq into the head representation, its text rotor and
  // the relation row.
  void query_backward(const EntityState& head, std::size_t relation, const QueryState& state,
                      std::span<const double> grad_q, std::span<double> grad_rep,
                      std::span<double> grad_aux, std::span<double> grad_relation) const;
  // Backpropagates entity-level gradients into graph rows and adjusters.
  void entity_backward(std::size_t entity, const EntityState& state, std::span<const double> grad_rep,
                       std::span<const double> grad_aux, ModelParams& grads,
                       const TextOverrides* overrides = nullptr) const;
  // Same, writing the graph row gradient and adjuster gradients to separate
  // buffers (grad_graph_row may be empty when the layout has no graph blocks).
  void entity_backward(std::size_t entity, const EntityState& state, std::span<const double> grad_rep,
                       std::span<const double> grad_aux, std::span<double> grad_graph_row,
                       std::span<Adjuster> grad_adjusters, const TextOverrides* overrides = nullptr) const;

  std::span<const double> raw_text(std::size_t entity, std::size_t slot,
                                   const TextOverrides* overrides = nullptr) const;
  std::size_t num_slots() const { return text_.slots.size(); }

 private:
  ModelSpec spec_;
  std::size_t num_entities_;
  std::size_t num_relations_;
  TextInputs text_;
  // Adjuster inputs: the slots themselves, or their concatenation.
  std::vector<std::shared_ptr<const TextTable>> inputs_;
  ModelLayout layout_;
  ModelParams params_;
};

}  // namespace hkge
