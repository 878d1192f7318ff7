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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hkge/model.h"

namespace hkge {

// One text table feeding a model slot: the source id declared in the file
// header and the file path.
struct TextSource {
  std::string source_id;
  std::string path;
  bool operator==(const TextSource&) const = default;
};

// Everything that defines an experiment. Runtime knobs that must not change
// results (thread count, output directory) live outside this struct.
struct RunConfig {
  ModelSpec model;
  std::size_t batch_size = 400;
  double learning_rate = 0.01;
  // Sampled negatives per positive; -1 selects the full softmax over tails.
  long negatives = 100;
  std::size_t max_epochs = 500;
  std::size_t eval_every = 5;
  // Evaluations without validation improvement before stopping.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::vector<TextSource> text_tables;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;
};

// Applies one key=value setting. Unknown keys and malformed values throw
// ConfigError. Relative paths are resolved against `base_dir`.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

// Parses a flat key=value file ('#' starts a comment line). Relative paths
// are resolved against the directory containing the file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Fully resolved config in the same key=value format, one key per line in a
// fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace hkge
