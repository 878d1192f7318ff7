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

#include "hkge/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hkge/error.h"
#include "hkge/evaluation.h"
#include "hkge/parallel.h"

namespace hkge {
namespace {

constexpr std::size_t kExampleChunk = 16;
constexpr std::size_t kEntityChunk = 256;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

using RowMap = std::map<std::size_t, std::vector<double>>;

std::vector<double>& row_of(RowMap& m, std::size_t key, std::size_t width) {
  auto [it, inserted] = m.try_emplace(key);
  if (inserted) it->second.assign(width, 0.0);
  return it->second;
}

void merge_rows(RowMap& into, RowMap& from) {
  for (auto& [key, values] : from) {
    auto [it, inserted] = into.try_emplace(key);
    if (inserted) {
      it->second = std::move(values);
    } else {
      for (std::size_t i = 0; i < values.size(); ++i) it->second[i] += values[i];
    }
  }
}

void merge_scalars(std::map<std::size_t, double>& into, const std::map<std::size_t, double>& from) {
  for (const auto& [key, v] : from) into[key] += v;
}

// Per-chunk partial results, reduced in chunk order.
struct Partial {
  double loss = 0.0;
  std::optional<std::size_t> bad;
  RowMap rep, aux, rel;
  std::map<std::size_t, double> bias_head, bias_tail;
};

void add_rows(std::vector<std::size_t>& rows, const std::vector<std::size_t>& extra) {
  std::vector<std::size_t> merged;
  merged.reserve(rows.size() + extra.size());
  std::set_union(rows.begin(), rows.end(), extra.begin(), extra.end(), std::back_inserter(merged));
  rows.swap(merged);
}

}  // namespace

std::vector<std::size_t> sample_negatives(std::mt19937_64& rng, const Triple& positive, std::size_t n,
                                          const FilterIndex& filter, std::size_t num_entities) {
  if (num_entities < 2) {
    throw CannotSample(fmt::format("cannot sample negatives from {} entities", num_entities));
  }
  std::uniform_int_distribution<std::size_t> pick(0, num_entities - 1);
  std::vector<std::size_t> out;
  out.reserve(n);
  const std::size_t max_draws = 100 * n;
  for (std::size_t draws = 0; out.size() < n && draws < max_draws; ++draws) {
    const std::size_t t = pick(rng);
    if (!filter.contains(positive.head, positive.relation, t)) out.push_back(t);
  }
  if (out.size() < n) {
    spdlog::warn("negative sampling for ({}, {}, {}) hit {} rejections; allowing filtered tails",
                 positive.head, positive.relation, positive.tail, max_draws);
    while (out.size() < n) out.push_back(pick(rng));
  }
  return out;
}

Gradients Gradients::like(const ModelParams& params) { return Gradients{params.zeros_like(), {}, {}}; }

void Gradients::clear() {
  for (std::size_t e : entity_rows) {
    auto row = values.graph_entity.row(e);
    std::fill(row.begin(), row.end(), 0.0);
    values.bias_head.data[e] = 0.0;
    values.bias_tail.data[e] = 0.0;
  }
  for (std::size_t r : relation_rows) {
    auto row = values.relation.row(r);
    std::fill(row.begin(), row.end(), 0.0);
  }
  for (Adjuster& a : values.adjusters) {
    for (Tensor* t : a.tensors()) std::fill(t->data.begin(), t->data.end(), 0.0);
  }
  entity_rows.clear();
  relation_rows.clear();
}

double batch_loss(const Model& model, std::span<const Triple> batch,
                  std::span<const std::vector<std::size_t>> negatives, Gradients* grads,
                  std::size_t threads) {
  if (batch.empty()) throw ConfigError("batch_loss needs a nonempty batch");
  const bool full = negatives.empty();
  if (!full && negatives.size() != batch.size()) {
    throw DimensionMismatch(fmt::format("{} negative lists for {} examples", negatives.size(), batch.size()));
  }
  const std::size_t n_e = model.num_entities();
  const ModelLayout& layout = model.layout();
  const std::size_t W = layout.width;
  const std::size_t aux_width = layout.rotor.empty() ? 0 : 4 * model.spec().dim;

  std::vector<char> needed(n_e, full ? 1 : 0);
  auto need = [&](std::size_t e) {
    if (e >= n_e) throw UnknownEntity(fmt::format("entity index {} out of range ({} entities)", e, n_e));
    needed[e] = 1;
  };
  for (std::size_t i = 0; i < batch.size(); ++i) {
    need(batch[i].head);
    need(batch[i].tail);
    if (!full) {
      if (negatives[i].empty()) throw ConfigError("every example needs at least one negative");
      for (std::size_t t : negatives[i]) need(t);
    }
  }
  std::vector<std::size_t> entities;
  for (std::size_t e = 0; e < n_e; ++e) {
    if (needed[e]) entities.push_back(e);
  }
  std::vector<EntityState> states(n_e);
  parallel_for(entities.size(), threads, [&](std::size_t i) { states[entities[i]] = model.entity_state(entities[i]); });

  const auto& bias_head = model.params().bias_head.data;
  const auto& bias_tail = model.params().bias_tail.data;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t n_chunks = (batch.size() + kExampleChunk - 1) / kExampleChunk;
  std::vector<Partial> parts(n_chunks);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    Partial& part = parts[c];
    QueryState qs;
    std::vector<std::size_t> cands;
    std::vector<double> scores, coefs, grad_q(W);
    const std::size_t end = std::min(batch.size(), (c + 1) * kExampleChunk);
    for (std::size_t i = c * kExampleChunk; i < end; ++i) {
      const Triple& x = batch[i];
      model.query_forward(states[x.head], x.relation, qs);
      cands.clear();
      if (full) {
        cands.resize(n_e);
        std::iota(cands.begin(), cands.end(), std::size_t{0});
      } else {
        cands.push_back(x.tail);
        cands.insert(cands.end(), negatives[i].begin(), negatives[i].end());
      }
      scores.resize(cands.size());
      coefs.resize(cands.size());
      for (std::size_t k = 0; k < cands.size(); ++k) {
        scores[k] = -model.distance(qs.q, states[cands[k]].rep) + bias_head[x.head] + bias_tail[cands[k]];
      }

      double loss = 0.0;
      if (full) {
        const double m = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double s : scores) z += std::exp(s - m);
        loss = m + std::log(z) - scores[x.tail];
        for (std::size_t k = 0; k < cands.size(); ++k) {
          coefs[k] = (std::exp(scores[k] - m) / z - (k == x.tail ? 1.0 : 0.0)) * inv_b;
        }
      } else {
        const double inv_n = 1.0 / static_cast<double>(cands.size() - 1);
        loss = softplus(-scores[0]);
        coefs[0] = -sigmoid(-scores[0]) * inv_b;
        double neg = 0.0;
        for (std::size_t k = 1; k < cands.size(); ++k) {
          neg += softplus(scores[k]);
          coefs[k] = sigmoid(scores[k]) * inv_n * inv_b;
        }
        loss += neg * inv_n;
      }
      if (!std::isfinite(loss) && !part.bad) part.bad = i;
      part.loss += loss;
      if (!grads) continue;

      std::fill(grad_q.begin(), grad_q.end(), 0.0);
      double head_bias_grad = 0.0;
      for (std::size_t k = 0; k < cands.size(); ++k) {
        const std::size_t t = cands[k];
        model.distance_backward(qs.q, states[t].rep, coefs[k], grad_q, row_of(part.rep, t, W));
        part.bias_tail[t] += coefs[k];
        head_bias_grad += coefs[k];
      }
      part.bias_head[x.head] += head_bias_grad;
      std::span<double> grad_aux;
      if (aux_width) grad_aux = row_of(part.aux, x.head, aux_width);
      model.query_backward(states[x.head], x.relation, qs, grad_q, row_of(part.rep, x.head, W), grad_aux,
                           row_of(part.rel, x.relation, W));
    }
  });

  double total = 0.0;
  for (const Partial& part : parts) {
    if (part.bad) {
      const Triple& x = batch[*part.bad];
      throw Diverged(fmt::format("non-finite loss at triple ({}, {}, {})", x.head, x.relation, x.tail));
    }
    total += part.loss;
  }
  if (!std::isfinite(total)) throw Diverged("non-finite batch loss");
  if (!grads) return total * inv_b;

  Partial sum;
  for (Partial& part : parts) {
    merge_rows(sum.rep, part.rep);
    merge_rows(sum.aux, part.aux);
    merge_rows(sum.rel, part.rel);
    merge_scalars(sum.bias_head, part.bias_head);
    merge_scalars(sum.bias_tail, part.bias_tail);
  }

  ModelParams& g = grads->values;
  std::vector<std::size_t> rel_rows;
  for (auto& [r, values] : sum.rel) {
    auto row = g.relation.row(r);
    for (std::size_t i = 0; i < W; ++i) row[i] += values[i];
    rel_rows.push_back(r);
  }
  add_rows(grads->relation_rows, rel_rows);
  for (const auto& [e, v] : sum.bias_head) g.bias_head.data[e] += v;
  for (const auto& [e, v] : sum.bias_tail) g.bias_tail.data[e] += v;

  std::vector<std::size_t> touched;
  for (const auto& [e, v] : sum.rep) touched.push_back(e);
  const std::vector<double> zeros(W, 0.0);
  auto backward_one = [&](std::size_t e, std::span<Adjuster> adjusters) {
    auto aux = sum.aux.find(e);
    std::span<const double> grad_aux;
    if (aux != sum.aux.end()) grad_aux = aux->second;
    model.entity_backward(e, states[e], sum.rep.at(e), grad_aux, g.graph_entity.row(e), adjusters);
  };
  if (g.adjusters.empty()) {
    for (std::size_t e : touched) backward_one(e, {});
  } else {
    // Graph rows are disjoint across chunks; adjuster gradients are summed
    // per chunk and then reduced in chunk order.
    const std::size_t n_groups = (touched.size() + kEntityChunk - 1) / kEntityChunk;
    std::vector<std::vector<Adjuster>> local(n_groups);
    parallel_for(n_groups, threads, [&](std::size_t c) {
      for (const Adjuster& a : g.adjusters) local[c].push_back(a.zeros_like());
      const std::size_t end = std::min(touched.size(), (c + 1) * kEntityChunk);
      for (std::size_t i = c * kEntityChunk; i < end; ++i) backward_one(touched[i], local[c]);
    });
    for (const auto& group : local) {
      for (std::size_t a = 0; a < group.size(); ++a) {
        auto dst = g.adjusters[a].tensors();
        auto src = group[a].tensors();
        for (std::size_t t = 0; t < dst.size(); ++t) {
          for (std::size_t i = 0; i < dst[t]->data.size(); ++i) dst[t]->data[i] += src[t]->data[i];
        }
      }
    }
  }
  std::vector<std::size_t> entity_rows = touched;
  for (const auto& [e, v] : sum.bias_head) entity_rows.push_back(e);
  std::sort(entity_rows.begin(), entity_rows.end());
  entity_rows.erase(std::unique(entity_rows.begin(), entity_rows.end()), entity_rows.end());
  add_rows(grads->entity_rows, entity_rows);
  return total * inv_b;
}

void adagrad_update(std::span<double> theta, std::span<const double> grad, std::span<double> accum,
                    double learning_rate, double epsilon) {
  if (theta.size() != grad.size() || theta.size() != accum.size()) {
    throw DimensionMismatch(fmt::format("adagrad shapes differ: theta {}, grad {}, accum {}", theta.size(),
                                        grad.size(), accum.size()));
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    accum[i] += grad[i] * grad[i];
    theta[i] -= learning_rate * grad[i] / (std::sqrt(accum[i]) + epsilon);
  }
}

AdagradState AdagradState::like(const ModelParams& params) { return AdagradState{params.zeros_like()}; }

void adagrad_step(ModelParams& params, const Gradients& grads, AdagradState& state, double learning_rate) {
  auto p = params.tensors();
  auto g = grads.values.tensors();
  auto a = state.accum.tensors();
  if (p.size() != g.size() || p.size() != a.size()) throw DimensionMismatch("adagrad tensor lists differ");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i]->same_shape(*g[i]) || !p[i]->same_shape(*a[i])) {
      throw DimensionMismatch(fmt::format("adagrad shape mismatch on '{}'", p[i]->name));
    }
  }
  for (std::size_t e : grads.entity_rows) {
    adagrad_update(params.graph_entity.row(e), grads.values.graph_entity.row(e), state.accum.graph_entity.row(e),
                   learning_rate);
    adagrad_update(params.bias_head.row(e), grads.values.bias_head.row(e), state.accum.bias_head.row(e),
                   learning_rate);
    adagrad_update(params.bias_tail.row(e), grads.values.bias_tail.row(e), state.accum.bias_tail.row(e),
                   learning_rate);
  }
  for (std::size_t r : grads.relation_rows) {
    adagrad_update(params.relation.row(r), grads.values.relation.row(r), state.accum.relation.row(r),
                   learning_rate);
  }
  for (std::size_t i = 4; i < p.size(); ++i) adagrad_update(p[i]->data, g[i]->data, a[i]->data, learning_rate);
}

std::string log_line(const EpochRecord& record, bool include_timing) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["mean_loss"] = record.mean_loss;
  j["val_mrr"] = record.val_mrr ? nlohmann::ordered_json(*record.val_mrr) : nlohmann::ordered_json(nullptr);
  if (include_timing) j["elapsed_ms"] = record.elapsed_ms;
  return j.dump();
}

TrainResult train(const RunConfig& config, const Dataset& dataset, Model& model, const TrainOptions& options) {
  config.validate();
  model.initialize(config.seed);
  TrainResult result;
  if (config.max_epochs == 0) return result;
  if (dataset.train.empty()) throw DataError("training split is empty");

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    0x7261696eu};
  std::mt19937_64 rng(seq);
  Gradients grads = Gradients::like(model.params());
  AdagradState optimizer = AdagradState::like(model.params());
  ModelParams best = model.params();
  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool full = config.negatives == -1;
  const std::size_t n_neg = full ? 0 : static_cast<std::size_t>(config.negatives);
  std::size_t stale = 0;

  std::vector<Triple> batch;
  std::vector<std::vector<std::size_t>> negs;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      batch.clear();
      negs.clear();
      for (std::size_t i = b; i < end; ++i) {
        batch.push_back(dataset.train[order[i]]);
        if (!full) negs.push_back(sample_negatives(rng, batch.back(), n_neg, dataset.filter, model.num_entities()));
      }
      grads.clear();
      loss_sum += batch_loss(model, batch, negs, &grads, options.threads);
      adagrad_step(model.params(), grads, optimizer, config.learning_rate);
      ++n_batches;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_sum / static_cast<double>(n_batches);
    const bool eval_now = epoch % config.eval_every == 0 || epoch == config.max_epochs;
    if (eval_now && !dataset.valid.empty()) {
      const double mrr = evaluate(model, dataset, Split::kValid, options.threads).both.mrr;
      record.val_mrr = mrr;
      if (result.best_epoch == 0 || mrr > result.best_valid_mrr) {
        best = model.params();
        result.best_epoch = epoch;
        result.best_valid_mrr = mrr;
        stale = 0;
      } else {
        ++stale;
      }
    }
    record.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
    if (stale >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (result.best_epoch > 0) model.params() = best;
  return result;
}

}  // namespace hkge
