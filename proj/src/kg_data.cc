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

#include "hkge/kg_data.h"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "hkge/error.h"

namespace hkge {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

struct RawTriple {
  std::string head, relation, tail;
  std::size_t line;
};

std::vector<RawTriple> read_triples(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<RawTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(path.string(), line_no,
                       fmt::format("expected 3 TAB-separated fields, got {}", fields.size()));
    }
    if (fields[1].ends_with(kInverseSuffix)) {
      throw ParseError(path.string(), line_no,
                       fmt::format("relation '{}' uses the reserved suffix '{}'", fields[1],
                                   kInverseSuffix));
    }
    out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), line_no});
  }
  return out;
}

std::uint64_t pair_key(std::size_t head, std::size_t relation, std::size_t num_relations) {
  return static_cast<std::uint64_t>(head) * num_relations + relation;
}

std::string unescape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      const char next = text[i + 1];
      if (next == 't' || next == 'n' || next == '\\') {
        out.push_back(next == 't' ? '\t' : next == 'n' ? '\n' : '\\');
        ++i;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

std::unordered_map<std::size_t, std::string> read_text_map(const std::filesystem::path& path,
                                                           const Vocabulary& entities,
                                                           CoverageReport& coverage) {
  std::unordered_map<std::size_t, std::string> out;
  coverage = CoverageReport{};
  coverage.total = entities.size();
  if (path.empty()) {
    coverage.missing = entities.labels();
    return out;
  }
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string(), line_no, "expected entity<TAB>text");
    }
    const std::string_view key(line.data(), tab);
    const auto index = entities.find(key);
    if (!index) {
      throw UnknownEntity(fmt::format("{}:{}: entity '{}' is not in the vocabulary", path.string(),
                                      line_no, key));
    }
    if (out.contains(*index)) {
      throw DuplicateKey(fmt::format("{}:{}: duplicate entity '{}'", path.string(), line_no, key));
    }
    out.emplace(*index, unescape(std::string_view(line).substr(tab + 1)));
  }
  for (std::size_t e = 0; e < entities.size(); ++e) {
    if (out.contains(e)) {
      ++coverage.covered;
    } else {
      coverage.missing.push_back(entities.label(e));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string_view> split_tabs(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t Vocabulary::intern(const std::string& label) {
  auto [it, inserted] = index_.try_emplace(label, labels_.size());
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FilterIndex::FilterIndex(std::size_t num_relations, std::span<const std::span<const Triple>> splits)
    : num_relations_(num_relations) {
  for (auto split : splits) {
    for (const Triple& t : split) tails_[pair_key(t.head, t.relation, num_relations_)].push_back(t.tail);
  }
  for (auto& [key, tails] : tails_) {
    std::sort(tails.begin(), tails.end());
    tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
  }
}

std::span<const std::size_t> FilterIndex::tails(std::size_t head, std::size_t relation) const {
  auto it = tails_.find(pair_key(head, relation, num_relations_));
  if (it == tails_.end()) return {};
  return it->second;
}

bool FilterIndex::contains(std::size_t head, std::size_t relation, std::size_t tail) const {
  auto t = tails(head, relation);
  return std::binary_search(t.begin(), t.end(), tail);
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw ConfigError(fmt::format("unknown split '{}' (expected train|valid|test)", name));
}

const std::vector<Triple>& Dataset::split(Split which) const {
  switch (which) {
    case Split::kTrain: return train;
    case Split::kValid: return valid;
    case Split::kTest: return test;
  }
  return test;
}

Dataset load_dataset(const std::filesystem::path& train_path, const std::filesystem::path& valid_path,
                     const std::filesystem::path& test_path) {
  const auto raw_train = read_triples(train_path);
  if (raw_train.empty()) throw ParseError(train_path.string(), 0, "empty split");
  const auto raw_valid = valid_path.empty() ? std::vector<RawTriple>{} : read_triples(valid_path);
  const auto raw_test = test_path.empty() ? std::vector<RawTriple>{} : read_triples(test_path);

  Dataset ds;
  Vocabulary base;
  for (const auto& t : raw_train) {
    ds.entities.intern(t.head);
    base.intern(t.relation);
    ds.entities.intern(t.tail);
  }
  ds.num_base_relations = base.size();
  for (const auto& label : base.labels()) ds.relations.intern(label);
  for (const auto& label : base.labels()) ds.relations.intern(label + std::string(kInverseSuffix));

  ds.num_raw_train = raw_train.size();
  ds.train.reserve(2 * raw_train.size());
  for (const auto& t : raw_train) {
    ds.train.push_back({*ds.entities.find(t.head), *base.find(t.relation), *ds.entities.find(t.tail)});
  }
  for (std::size_t i = 0; i < ds.num_raw_train; ++i) {
    const Triple& t = ds.train[i];
    ds.train.push_back({t.tail, ds.inverse(t.relation), t.head});
  }

  auto resolve = [&](const std::vector<RawTriple>& raw, const std::filesystem::path& path) {
    std::vector<Triple> out;
    std::set<std::string> unknown;
    for (const auto& t : raw) {
      const auto h = ds.entities.find(t.head);
      const auto r = base.find(t.relation);
      const auto tl = ds.entities.find(t.tail);
      if (!h) unknown.insert(t.head);
      if (!tl) unknown.insert(t.tail);
      if (!r) unknown.insert("relation:" + t.relation);
      if (h && r && tl) out.push_back({*h, *r, *tl});
    }
    if (!unknown.empty()) {
      throw UnknownEntity(fmt::format("{}: labels absent from the training split: {}", path.string(),
                                      fmt::join(unknown, ", ")));
    }
    return out;
  };
  ds.valid = resolve(raw_valid, valid_path);
  ds.test = resolve(raw_test, test_path);
  ds.filter = build_filter(ds);
  return ds;
}

FilterIndex build_filter(const Dataset& dataset) {
  auto invert = [&](const std::vector<Triple>& split) {
    std::vector<Triple> out;
    out.reserve(split.size());
    for (const Triple& t : split) out.push_back({t.tail, dataset.inverse(t.relation), t.head});
    return out;
  };
  const auto valid_inv = invert(dataset.valid);
  const auto test_inv = invert(dataset.test);
  const std::span<const Triple> splits[] = {dataset.train, dataset.valid, dataset.test, valid_inv,
                                            test_inv};
  return FilterIndex(dataset.relations.size(), splits);
}

TextAssets load_text_assets(const std::filesystem::path& names_path,
                            const std::filesystem::path& descriptions_path, const Vocabulary& entities) {
  TextAssets assets;
  assets.names = read_text_map(names_path, entities, assets.name_coverage);
  assets.descriptions = read_text_map(descriptions_path, entities, assets.description_coverage);
  return assets;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto flush = [&](std::size_t begin, std::size_t end) {
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (end > begin) out.emplace_back(text.substr(begin, end - begin));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '?' || c == '!') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      flush(start, i + 1);
      start = i + 1;
    }
  }
  flush(start, text.size());
  return out;
}

}  // namespace hkge
