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
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hkge/kg_data.h"
#include "hkge/tensor.h"

namespace hkge {

// Magic first field of every embedding file header.
inline constexpr std::string_view kEmbeddingMagic = "#hkge-emb";

// Frozen vectors from one pre-trained text encoder, indexed by entity.
struct TextTable {
  std::string source_id;
  std::size_t dim = 0;
  // num_entities x dim, row-major. Entities without a row hold zeros.
  std::vector<double> vectors;
  std::vector<bool> present;
  // Optional per-sentence vectors, in sentence-index order.
  std::unordered_map<std::size_t, std::vector<std::vector<double>>> sentence_vectors;
  CoverageReport coverage;
  // Rows naming entities outside the vocabulary; skipped on load.
  std::size_t unknown_rows = 0;

  std::size_t num_entities() const { return present.size(); }
  std::span<const double> vector(std::size_t entity) const {
    return std::span<const double>(vectors).subspan(entity * dim, dim);
  }
};

// Parses an embedding file:
//   #hkge-emb<TAB>source=<id><TAB>dim=<D_T>[<TAB>key=value ...]
//   entity<TAB>v1 v2 ... v_{D_T}                       (entity rows)
//   entity<TAB>sentence_index<TAB>v1 ... v_{D_T}       (sentence rows)
// Lines starting with '#' after the header are comments. When an entity only
// has sentence rows its entity vector is the mean of its sentences.
TextTable load_text_table(const std::filesystem::path& path, std::string_view expected_source_id,
                          const Vocabulary& entities);

// Writes one entity row per vocabulary entry using `row(e)` (size `dim`).
// Values are printed with round-trip precision.
void write_text_table(const std::filesystem::path& path, std::string_view source_id, std::size_t dim,
                      const Vocabulary& entities,
                      const std::function<std::span<const double>(std::size_t)>& row);

// Two-layer tanh network mapping a raw text vector (D_T) to the model
// dimension D: out = tanh(W2 tanh(W1 raw + b1) + b2).
struct Adjuster {
  Tensor w1;  // hidden x input
  Tensor b1;  // 1 x hidden
  Tensor w2;  // output x hidden
  Tensor b2;  // 1 x output

  Adjuster() = default;
  Adjuster(const std::string& name, std::size_t input_dim, std::size_t hidden, std::size_t output_dim);

  std::size_t input_dim() const { return w1.cols; }
  std::size_t hidden_dim() const { return w1.rows; }
  std::size_t output_dim() const { return w2.rows; }

  // Glorot-uniform weights, zero biases.
  void init_glorot(std::mt19937_64& rng);
  // Same shapes, all zero; used as a gradient accumulator.
  Adjuster zeros_like() const;

  std::vector<double> forward(std::span<const double> raw) const;
  // Forward pass keeping the hidden activation for backward().
  void forward(std::span<const double> raw, std::span<double> hidden, std::span<double> out) const;

  // Accumulates parameter gradients into `grad` and, when `grad_raw` is
  // non-empty, the gradient with respect to the input.
  void backward(std::span<const double> raw, std::span<const double> hidden,
                std::span<const double> out, std::span<const double> upstream, Adjuster& grad,
                std::span<double> grad_raw) const;

  std::vector<Tensor*> tensors() { return {&w1, &b1, &w2, &b2}; }
  std::vector<const Tensor*> tensors() const { return {&w1, &b1, &w2, &b2}; }
};

struct AdjusterGradients {
  Adjuster params;
  std::vector<double> raw;
};

// Gradients of <upstream, adjust(raw)> with respect to every parameter and
// the raw input.
AdjusterGradients adjuster_backward(const Adjuster& adjuster, std::span<const double> raw,
                                    std::span<const double> upstream);

}  // namespace hkge
