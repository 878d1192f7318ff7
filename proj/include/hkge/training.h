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
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hkge/config.h"
#include "hkge/kg_data.h"
#include "hkge/model.h"

namespace hkge {

// Draws `n` corrupted tails for `positive` uniformly from the entities,
// rejecting (h, r, t') pairs present in `filter`. After 100 * n draws the
// remaining slots are filled without rejection and a warning is logged.
std::vector<std::size_t> sample_negatives(std::mt19937_64& rng, const Triple& positive, std::size_t n,
                                          const FilterIndex& filter, std::size_t num_entities);

// Gradient store mirroring ModelParams, with the rows written since the last
// clear() so that clearing and the optimizer only visit those rows.
struct Gradients {
  ModelParams values;
  std::vector<std::size_t> entity_rows;    // sorted, unique
  std::vector<std::size_t> relation_rows;  // sorted, unique

  static Gradients like(const ModelParams& params);
  void clear();
};

// Mean loss over `batch`. With `negatives` empty the loss is the softmax
// cross-entropy over every tail; otherwise negatives[i] lists the corrupted
// tails of batch[i] and each example contributes
//   softplus(-f(pos)) + mean_j softplus(f(neg_j)).
// When `grads` is non-null, d(loss)/d(params) is added to it. The result is
// bitwise identical for every thread count.
double batch_loss(const Model& model, std::span<const Triple> batch,
                  std::span<const std::vector<std::size_t>> negatives, Gradients* grads,
                  std::size_t threads = 1);

inline constexpr double kAdagradEpsilon = 1e-8;

// Element-wise Adagrad: accum += g^2; theta -= lr * g / (sqrt(accum) + eps).
void adagrad_update(std::span<double> theta, std::span<const double> grad, std::span<double> accum,
                    double learning_rate, double epsilon = kAdagradEpsilon);

struct AdagradState {
  ModelParams accum;
  static AdagradState like(const ModelParams& params);
};

// Applies Adagrad to the touched rows of every row-indexed tensor and to all
// adjuster weights.
void adagrad_step(ModelParams& params, const Gradients& grads, AdagradState& state, double learning_rate);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // mean batch loss over the epoch
  std::optional<double> val_mrr;
  double elapsed_ms = 0.0;
};

// {"epoch", "mean_loss", "val_mrr"} as one JSON line (val_mrr is null on
// epochs without validation). elapsed_ms is included only when asked so that
// logs of identical runs compare equal byte for byte.
std::string log_line(const EpochRecord& record, bool include_timing);

struct TrainOptions {
  std::size_t threads = 1;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // 0 when no validation ran
  double best_valid_mrr = 0.0;
  bool stopped_early = false;
};

// Initializes `model` from config.seed, trains with Adagrad and leaves the
// parameters of the best validation evaluation in `model`. Validation runs
// every eval_every epochs and after the last epoch; `patience` evaluations
// without improvement stop training. max_epochs = 0 leaves the initial
// parameters and an empty log.
TrainResult train(const RunConfig& config, const Dataset& dataset, Model& model,
                  const TrainOptions& options = {});

}  // namespace hkge
