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

#include "hkge/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hkge/error.h"

namespace hkge {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [next, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || next != value.data() + value.size()) {
    throw ConfigError(fmt::format("invalid value '{}' for '{}'", value, key));
  }
  return out;
}

std::string resolve(std::string_view value, const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(value)};
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p.string();
  return (base_dir / p).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
  if (model.dim < 1) throw ConfigError("dim must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (negatives < 1 && negatives != -1) throw ConfigError("negatives must be >= 1 or -1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(model.init_scale > 0.0)) throw ConfigError("init_scale must be > 0");
  make_layout(model, text_tables.size());
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir) {
  value = trim(value);
  if (key == "model") {
    c.model.kind = parse_model_kind(value);
  } else if (key == "algebra") {
    c.model.algebra = parse_algebra(value);
  } else if (key == "dim") {
    c.model.dim = parse_number<std::size_t>(key, value);
  } else if (key == "hidden") {
    c.model.hidden = parse_number<std::size_t>(key, value);
  } else if (key == "distance") {
    c.model.distance = parse_distance(value);
  } else if (key == "init_scale") {
    c.model.init_scale = parse_number<double>(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "negatives") {
    c.negatives = parse_number<long>(key, value);
  } else if (key == "max_epochs") {
    c.max_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "eval_every") {
    c.eval_every = parse_number<std::size_t>(key, value);
  } else if (key == "patience") {
    c.patience = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "train") {
    c.train_path = resolve(value, base_dir);
  } else if (key == "valid") {
    c.valid_path = resolve(value, base_dir);
  } else if (key == "test") {
    c.test_path = resolve(value, base_dir);
  } else if (key == "text_tables") {
    // Comma-separated source:path entries, in model slot order.
    c.text_tables.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (item.empty()) continue;
      const auto colon = item.find(':');
      if (colon == std::string_view::npos || colon == 0) {
        throw ConfigError(fmt::format("text_tables entry '{}' must be source:path", item));
      }
      c.text_tables.push_back({std::string(item.substr(0, colon)), resolve(item.substr(colon + 1), base_dir)});
    }
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("config line {}: expected key=value", line_no));
    }
    apply_setting(c, trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::absolute(path).parent_path());
}

std::string serialize_config(const RunConfig& c) {
  std::string tables;
  for (const auto& t : c.text_tables) {
    if (!tables.empty()) tables += ",";
    tables += t.source_id + ":" + t.path;
  }
  return fmt::format(
      "model={}\nalgebra={}\ndim={}\nhidden={}\ndistance={}\ninit_scale={}\n"
      "batch_size={}\nlearning_rate={}\nnegatives={}\nmax_epochs={}\neval_every={}\npatience={}\n"
      "seed={}\ntrain={}\nvalid={}\ntest={}\ntext_tables={}\n",
      to_string(c.model.kind), to_string(c.model.algebra), c.model.dim, c.model.hidden,
      to_string(c.model.distance), c.model.init_scale, c.batch_size, c.learning_rate, c.negatives,
      c.max_epochs, c.eval_every, c.patience, c.seed, c.train_path, c.valid_path, c.test_path, tables);
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace hkge
