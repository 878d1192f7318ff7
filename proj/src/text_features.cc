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

#include "hkge/text_features.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "hkge/error.h"

namespace hkge {
namespace {

std::vector<double> parse_values(std::string_view text, std::size_t dim, const std::string& path,
                                 std::size_t line_no) {
  std::vector<double> out;
  out.reserve(dim);
  const char* p = text.data();
  const char* end = p + text.size();
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next != end && *next != ' ' && *next != '\t')) {
      throw ParseError(path, line_no, "malformed number");
    }
    if (!std::isfinite(v)) throw ParseError(path, line_no, "non-finite value");
    out.push_back(v);
    p = next;
  }
  if (out.size() != dim) {
    throw ParseError(path, line_no, fmt::format("expected {} values, got {}", dim, out.size()));
  }
  return out;
}

std::size_t parse_size(std::string_view text, const std::string& path, std::size_t line_no,
                       std::string_view what) {
  std::size_t v = 0;
  auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || next != text.data() + text.size()) {
    throw ParseError(path, line_no, fmt::format("malformed {} '{}'", what, text));
  }
  return v;
}

double tanh_prime_from_value(double t) { return 1.0 - t * t; }

}  // namespace

TextTable load_text_table(const std::filesystem::path& path, std::string_view expected_source_id,
                          const Vocabulary& entities) {
  const std::string p = path.string();
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", p));

  std::string line;
  if (!std::getline(in, line)) throw ParseError(p, 1, "missing header");
  auto header = split_tabs(line);
  if (header.empty() || header[0] != kEmbeddingMagic) {
    throw ParseError(p, 1, fmt::format("header must start with '{}'", kEmbeddingMagic));
  }
  TextTable table;
  bool have_source = false, have_dim = false;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto eq = header[i].find('=');
    if (eq == std::string_view::npos) throw ParseError(p, 1, fmt::format("bad header field '{}'", header[i]));
    const auto key = header[i].substr(0, eq);
    const auto value = header[i].substr(eq + 1);
    if (key == "source") {
      table.source_id = std::string(value);
      have_source = true;
    } else if (key == "dim") {
      table.dim = parse_size(value, p, 1, "dim");
      have_dim = true;
    }
  }
  if (!have_source || !have_dim || table.dim == 0) {
    throw ParseError(p, 1, "header needs source=<id> and dim=<D_T> (D_T >= 1)");
  }
  if (!expected_source_id.empty() && table.source_id != expected_source_id) {
    throw WrongSource(fmt::format("{}: source '{}' but '{}' was expected", p, table.source_id,
                                  expected_source_id));
  }

  const std::size_t n = entities.size();
  table.vectors.assign(n * table.dim, 0.0);
  table.present.assign(n, false);
  std::vector<bool> has_entity_row(n, false);
  std::unordered_map<std::size_t, std::map<std::size_t, std::vector<double>>> sentences;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(p, line_no, fmt::format("expected 2 or 3 TAB-separated fields, got {}", fields.size()));
    }
    const auto entity = entities.find(fields[0]);
    if (!entity) {
      ++table.unknown_rows;
      continue;
    }
    if (fields.size() == 2) {
      if (has_entity_row[*entity]) {
        throw DuplicateKey(fmt::format("{}:{}: duplicate row for entity '{}'", p, line_no, fields[0]));
      }
      auto values = parse_values(fields[1], table.dim, p, line_no);
      std::copy(values.begin(), values.end(), table.vectors.begin() + *entity * table.dim);
      has_entity_row[*entity] = true;
    } else {
      const std::size_t index = parse_size(fields[1], p, line_no, "sentence index");
      auto values = parse_values(fields[2], table.dim, p, line_no);
      auto [it, inserted] = sentences[*entity].emplace(index, std::move(values));
      if (!inserted) {
        throw DuplicateKey(fmt::format("{}:{}: duplicate sentence {} for entity '{}'", p, line_no, index,
                                       fields[0]));
      }
    }
  }

  for (auto& [entity, by_index] : sentences) {
    std::vector<std::vector<double>> ordered;
    std::size_t expect = 0;
    for (auto& [index, values] : by_index) {
      if (index != expect) {
        throw DataError(fmt::format("{}: entity '{}' has a gap in sentence indices at {}", p,
                                    entities.label(entity), expect));
      }
      ordered.push_back(std::move(values));
      ++expect;
    }
    if (!has_entity_row[entity]) {
      auto row = std::span<double>(table.vectors).subspan(entity * table.dim, table.dim);
      for (const auto& s : ordered) {
        for (std::size_t d = 0; d < table.dim; ++d) row[d] += s[d] / static_cast<double>(ordered.size());
      }
    }
    table.sentence_vectors.emplace(entity, std::move(ordered));
  }

  table.coverage.total = n;
  for (std::size_t e = 0; e < n; ++e) {
    table.present[e] = has_entity_row[e] || table.sentence_vectors.contains(e);
    if (table.present[e]) {
      ++table.coverage.covered;
    } else {
      table.coverage.missing.push_back(entities.label(e));
    }
  }
  return table;
}

void write_text_table(const std::filesystem::path& path, std::string_view source_id, std::size_t dim,
                      const Vocabulary& entities,
                      const std::function<std::span<const double>(std::size_t)>& row) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << fmt::format("{}\tsource={}\tdim={}\n", kEmbeddingMagic, source_id, dim);
  for (std::size_t e = 0; e < entities.size(); ++e) {
    auto values = row(e);
    if (values.size() != dim) {
      throw DimensionMismatch(fmt::format("row for '{}' has {} values, header says {}", entities.label(e),
                                          values.size(), dim));
    }
    out << entities.label(e) << '\t' << fmt::format("{}", fmt::join(values, " ")) << '\n';
  }
  if (!out) throw IoError(fmt::format("error while writing '{}'", path.string()));
}

Adjuster::Adjuster(const std::string& name, std::size_t input_dim, std::size_t hidden,
                   std::size_t output_dim)
    : w1(name + ".w1", hidden, input_dim),
      b1(name + ".b1", 1, hidden),
      w2(name + ".w2", output_dim, hidden),
      b2(name + ".b2", 1, output_dim) {}

void Adjuster::init_glorot(std::mt19937_64& rng) {
  for (Tensor* w : {&w1, &w2}) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w->rows + w->cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w->data) v = dist(rng);
  }
  std::fill(b1.data.begin(), b1.data.end(), 0.0);
  std::fill(b2.data.begin(), b2.data.end(), 0.0);
}

Adjuster Adjuster::zeros_like() const {
  Adjuster out = *this;
  for (Tensor* t : out.tensors()) std::fill(t->data.begin(), t->data.end(), 0.0);
  return out;
}

std::vector<double> Adjuster::forward(std::span<const double> raw) const {
  std::vector<double> hidden(hidden_dim());
  std::vector<double> out(output_dim());
  forward(raw, hidden, out);
  return out;
}

void Adjuster::forward(std::span<const double> raw, std::span<double> hidden, std::span<double> out) const {
  if (raw.size() != input_dim()) {
    throw DimensionMismatch(fmt::format("adjuster {} expects input of size {}, got {}", w1.name,
                                        input_dim(), raw.size()));
  }
  for (std::size_t h = 0; h < hidden_dim(); ++h) {
    const double* w = &w1.data[h * input_dim()];
    double acc = b1.data[h];
    for (std::size_t i = 0; i < raw.size(); ++i) acc += w[i] * raw[i];
    hidden[h] = std::tanh(acc);
  }
  for (std::size_t o = 0; o < output_dim(); ++o) {
    const double* w = &w2.data[o * hidden_dim()];
    double acc = b2.data[o];
    for (std::size_t h = 0; h < hidden_dim(); ++h) acc += w[h] * hidden[h];
    out[o] = std::tanh(acc);
  }
}

void Adjuster::backward(std::span<const double> raw, std::span<const double> hidden,
                        std::span<const double> out, std::span<const double> upstream, Adjuster& grad,
                        std::span<double> grad_raw) const {
  if (upstream.size() != output_dim() || raw.size() != input_dim()) {
    throw DimensionMismatch(fmt::format("adjuster {} backward: shape mismatch", w1.name));
  }
  const std::size_t H = hidden_dim(), I = input_dim();
  std::vector<double> grad_hidden(H, 0.0);
  for (std::size_t o = 0; o < output_dim(); ++o) {
    const double delta = upstream[o] * tanh_prime_from_value(out[o]);
    if (delta == 0.0) continue;
    grad.b2.data[o] += delta;
    double* gw = &grad.w2.data[o * H];
    const double* w = &w2.data[o * H];
    for (std::size_t h = 0; h < H; ++h) {
      gw[h] += delta * hidden[h];
      grad_hidden[h] += delta * w[h];
    }
  }
  for (std::size_t h = 0; h < H; ++h) {
    const double delta = grad_hidden[h] * tanh_prime_from_value(hidden[h]);
    if (delta == 0.0) continue;
    grad.b1.data[h] += delta;
    double* gw = &grad.w1.data[h * I];
    const double* w = &w1.data[h * I];
    for (std::size_t i = 0; i < I; ++i) gw[i] += delta * raw[i];
    if (!grad_raw.empty()) {
      for (std::size_t i = 0; i < I; ++i) grad_raw[i] += delta * w[i];
    }
  }
}

AdjusterGradients adjuster_backward(const Adjuster& adjuster, std::span<const double> raw,
                                    std::span<const double> upstream) {
  std::vector<double> hidden(adjuster.hidden_dim());
  std::vector<double> out(adjuster.output_dim());
  adjuster.forward(raw, hidden, out);
  AdjusterGradients g{adjuster.zeros_like(), std::vector<double>(adjuster.input_dim(), 0.0)};
  adjuster.backward(raw, hidden, out, upstream, g.params, g.raw);
  return g;
}

}  // namespace hkge
