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

#include "hkge/checkpoint.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "hkge/error.h"

namespace hkge {

using nlohmann::ordered_json;

std::string checkpoint_json(const RunConfig& config, const Dataset& dataset, const Model& model) {
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed"] = config.seed;
  j["config"] = serialize_config(config);
  j["entities"] = dataset.entities.labels();
  j["relations"] = dataset.relations.labels();
  ordered_json sources = ordered_json::array();
  for (const auto& slot : model.text().slots) sources.push_back(slot->source_id);
  j["text_sources"] = sources;
  ordered_json tensors = ordered_json::array();
  for (const Tensor* t : model.params().tensors()) {
    tensors.push_back({{"name", t->name}, {"rows", t->rows}, {"cols", t->cols}, {"data", t->data}});
  }
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const Dataset& dataset,
                     const Model& model) {
  const std::string text = checkpoint_json(config, dataset, model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("error while writing checkpoint '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string p = path.string();
  ordered_json j;
  try {
    j = ordered_json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(fmt::format("{}: not valid JSON ({})", p, e.what()));
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw DataError(fmt::format("{}: not an hkge checkpoint", p));
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError(fmt::format("{}: checkpoint version {} is not supported (expected {})", p, version,
                                  kCheckpointVersion));
    }
    Checkpoint c;
    c.config = parse_config(j.at("config").get<std::string>());
    c.entities = j.at("entities").get<std::vector<std::string>>();
    c.relations = j.at("relations").get<std::vector<std::string>>();
    c.text_sources = j.at("text_sources").get<std::vector<std::string>>();
    for (const auto& t : j.at("tensors")) {
      Tensor tensor(t.at("name").get<std::string>(), t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
      tensor.data = t.at("data").get<std::vector<double>>();
      if (tensor.data.size() != tensor.rows * tensor.cols) {
        throw DataError(fmt::format("{}: tensor '{}' holds {} values, shape says {}x{}", p, tensor.name,
                                    tensor.data.size(), tensor.rows, tensor.cols));
      }
      c.tensors.push_back(std::move(tensor));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: malformed checkpoint ({})", p, e.what()));
  }
}

void restore_checkpoint(const Checkpoint& c, const Dataset& dataset, Model& model) {
  if (c.entities != dataset.entities.labels()) {
    throw CheckpointMismatch("checkpoint entity vocabulary differs from the dataset");
  }
  if (c.relations != dataset.relations.labels()) {
    throw CheckpointMismatch("checkpoint relation vocabulary differs from the dataset");
  }
  std::vector<std::string> sources;
  for (const auto& slot : model.text().slots) sources.push_back(slot->source_id);
  if (c.text_sources != sources) {
    throw CheckpointMismatch(fmt::format("checkpoint text sources [{}] differ from the loaded tables [{}]",
                                         fmt::join(c.text_sources, ", "), fmt::join(sources, ", ")));
  }
  auto targets = model.params().tensors();
  if (targets.size() != c.tensors.size()) {
    throw CheckpointMismatch(fmt::format("checkpoint has {} tensors, model expects {}", c.tensors.size(),
                                         targets.size()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Tensor& src = c.tensors[i];
    if (src.name != targets[i]->name || !src.same_shape(*targets[i])) {
      throw CheckpointMismatch(fmt::format("tensor {} is '{}' {}x{}, model expects '{}' {}x{}", i, src.name,
                                           src.rows, src.cols, targets[i]->name, targets[i]->rows,
                                           targets[i]->cols));
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i]->data = c.tensors[i].data;
}

}  // namespace hkge
