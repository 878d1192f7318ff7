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

#include <filesystem>
#include <string>
#include <vector>

#include "hkge/config.h"
#include "hkge/kg_data.h"
#include "hkge/model.h"
#include "hkge/tensor.h"

namespace hkge {

inline constexpr std::string_view kCheckpointFormat = "hkge-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::vector<std::string> text_sources;  // source id per model text slot
  std::vector<Tensor> tensors;            // ModelParams::tensors() order
};

// JSON text of a checkpoint. Identical inputs give identical bytes.
std::string checkpoint_json(const RunConfig& config, const Dataset& dataset, const Model& model);
void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const Dataset& dataset,
                     const Model& model);

// Parses and validates the container; throws DataError on malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies checkpoint tensors into `model`. Throws CheckpointMismatch when the
// vocabularies, text sources, or tensor names and shapes disagree.
void restore_checkpoint(const Checkpoint& checkpoint, const Dataset& dataset, Model& model);

}  // namespace hkge
