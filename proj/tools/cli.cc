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

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hkge/analysis.h"
#include "hkge/checkpoint.h"
#include "hkge/config.h"
#include "hkge/error.h"
#include "hkge/evaluation.h"
#include "hkge/kg_data.h"
#include "hkge/model.h"
#include "hkge/training.h"

namespace hkge::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--config", c.config_path, "key=value run config")->check(CLI::ExistingFile);
  cmd.add_option("--set", c.settings, "override one config key (key=value), repeatable");
  cmd.add_option("--seed", c.seed, "random seed");
  cmd.add_option("--threads", c.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

void apply_overrides(RunConfig& config, const Common& c) {
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", s));
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1), fs::current_path());
  }
  if (c.seed) config.seed = *c.seed;
}

RunConfig resolve_config(const Common& c) {
  RunConfig config = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  apply_overrides(config, c);
  config.validate();
  return config;
}

Dataset load_data(const RunConfig& config) {
  if (config.train_path.empty()) throw ConfigError("config does not name a train file");
  return load_dataset(config.train_path, config.valid_path, config.test_path);
}

Model build_model(const RunConfig& config, const Dataset& dataset) {
  TextInputs inputs;
  for (const auto& t : config.text_tables) {
    auto table = std::make_shared<TextTable>(load_text_table(t.path, t.source_id, dataset.entities));
    if (table->coverage.covered < table->coverage.total) {
      spdlog::warn("{}: {} of {} entities have no vector", t.path, table->coverage.total - table->coverage.covered,
                   table->coverage.total);
    }
    if (table->unknown_rows > 0) spdlog::info("{}: skipped {} rows for unknown entities", t.path, table->unknown_rows);
    inputs.slots.push_back(std::move(table));
  }
  return Model(config.model, dataset.entities.size(), dataset.relations.size(), std::move(inputs));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("error while writing '{}'", path.string()));
}

// Loads the checkpoint, then the data and text tables its config names
// (after overrides), and restores the parameters.
struct Loaded {
  RunConfig config;
  Dataset dataset;
  std::unique_ptr<Model> model;
};

Loaded load_trained(const std::string& checkpoint_path, const Common& c) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Loaded l;
  l.config = c.config_path.empty() ? ckpt.config : load_config(c.config_path);
  apply_overrides(l.config, c);
  l.config.validate();
  l.dataset = load_data(l.config);
  l.model = std::make_unique<Model>(build_model(l.config, l.dataset));
  restore_checkpoint(ckpt, l.dataset, *l.model);
  return l;
}

int cmd_train(const Common& c, const std::string& out_dir, bool log_timing) {
  const RunConfig config = resolve_config(c);
  const Dataset dataset = load_data(config);
  Model model = build_model(config, dataset);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_file(out / "config.resolved.cfg", serialize_config(config));

  std::ofstream log(out / "train_log.jsonl", std::ios::binary);
  if (!log) throw IoError(fmt::format("cannot write '{}'", (out / "train_log.jsonl").string()));
  TrainOptions options;
  options.threads = c.threads;
  options.on_epoch = [&](const EpochRecord& r) {
    log << log_line(r, log_timing) << '\n';
    log.flush();
    if (r.val_mrr) {
      spdlog::info("epoch {} loss {:.6f} val_mrr {:.4f} ({:.0f} ms)", r.epoch, r.mean_loss, *r.val_mrr, r.elapsed_ms);
    } else {
      spdlog::debug("epoch {} loss {:.6f} ({:.0f} ms)", r.epoch, r.mean_loss, r.elapsed_ms);
    }
  };
  spdlog::info("training {} on {} entities, {} relations, {} training examples", to_string(config.model.kind),
               dataset.entities.size(), dataset.relations.size(), dataset.train.size());
  const TrainResult result = train(config, dataset, model, options);
  log.close();
  save_checkpoint(out / "checkpoint.json", config, dataset, model);
  if (result.best_epoch > 0) {
    spdlog::info("best validation MRR {:.4f} at epoch {}{}", result.best_valid_mrr, result.best_epoch,
                 result.stopped_early ? " (stopped early)" : "");
  }
  if (!dataset.test.empty()) {
    const EvalReport report = evaluate(model, dataset, Split::kTest, c.threads);
    write_file(out / "eval_test.json", report_json(report, "test") + "\n");
    fmt::print("{}", report_table(report));
  }
  return kOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& split, const std::string& json_out) {
  Loaded l = load_trained(checkpoint, c);
  const EvalReport report = evaluate(*l.model, l.dataset, parse_split(split), c.threads);
  if (!json_out.empty()) write_file(json_out, report_json(report, split) + "\n");
  fmt::print("{}", report_table(report));
  return kOk;
}

std::size_t lookup(const Vocabulary& vocab, const std::string& label, std::string_view what) {
  auto idx = vocab.find(label);
  if (!idx) throw UnknownEntity(fmt::format("unknown {} '{}'", what, label));
  return *idx;
}

struct AnalyzeArgs {
  bool cosine = false;
  bool shapley = false;
  std::string split = "test";
  std::string head, relation, tail;
  std::optional<std::size_t> slot;
  std::string json_out;
};

int cmd_analyze(const Common& c, const std::string& checkpoint, const AnalyzeArgs& a) {
  if (!a.cosine && !a.shapley) throw ConfigError("analyze needs --cosine and/or --shapley");
  if (a.shapley && (a.head.empty() || a.relation.empty() || a.tail.empty())) {
    throw ConfigError("--shapley needs --head, --relation and --tail");
  }
  Loaded l = load_trained(checkpoint, c);
  std::string json = "{\n";
  if (a.cosine) {
    const PartMatrix m = part_cosine_matrix(*l.model, l.dataset, parse_split(a.split), c.threads);
    fmt::print("part cosines (query part vs tail part), {} split\n{}", a.split, cosine_table(m));
    json += fmt::format("\"cosine\": {}", cosine_json(m));
  }
  if (a.shapley) {
    const Triple t{lookup(l.dataset.entities, a.head, "entity"), lookup(l.dataset.relations, a.relation, "relation"),
                   lookup(l.dataset.entities, a.tail, "entity")};
    const std::size_t slot = a.slot ? *a.slot : sentence_slot(*l.model);
    const TripleAttribution attr = attribute_triple(*l.model, t, slot, c.threads);
    if (a.cosine) fmt::print("\n");
    fmt::print("sentence Shapley values, text slot {}\n{}", slot, attribution_table(attr, l.dataset));
    if (a.cosine) json += ",\n";
    json += fmt::format("\"shapley\": {}", attribution_json(attr, l.dataset));
  }
  json += "\n}\n";
  if (!a.json_out.empty()) write_file(a.json_out, json);
  return kOk;
}

int cmd_export(const Common& c, const std::string& checkpoint, const std::string& output) {
  Loaded l = load_trained(checkpoint, c);
  export_embeddings(*l.model, l.dataset.entities, output);
  spdlog::info("wrote {} entity vectors of width {} to {}", l.dataset.entities.size(), l.model->layout().width,
               output);
  return kOk;
}

void setup_logging() {
  static bool done = false;
  if (done) return;
  auto logger = spdlog::stderr_color_mt("hkge");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  done = true;
}

int dispatch(int argc, const char* const* argv) {
  setup_logging();
  CLI::App app{"hkge: hypercomplex knowledge graph embeddings"};
  app.require_subcommand(1);

  Common common;
  std::string out_dir = "hkge_out";
  bool log_timing = false;
  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint, log and config echo");
  add_common(*train_cmd, common);
  train_cmd->add_option("--out-dir", out_dir, "output directory");
  train_cmd->add_flag("--log-timing", log_timing, "add elapsed_ms to train_log.jsonl records");

  std::string checkpoint, split = "test", json_out, output;
  auto* eval_cmd = app.add_subcommand("eval", "filtered link prediction metrics");
  add_common(*eval_cmd, common);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  eval_cmd->add_option("--split", split, "valid or test");
  eval_cmd->add_option("--json", json_out, "also write the report as JSON");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "part cosine matrix and sentence Shapley values");
  add_common(*analyze_cmd, common);
  analyze_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  analyze_cmd->add_flag("--cosine", analyze.cosine, "4x4 query/tail part cosine matrix");
  analyze_cmd->add_option("--split", analyze.split, "split for --cosine");
  analyze_cmd->add_flag("--shapley", analyze.shapley, "exact Shapley values of sentences for one triple");
  analyze_cmd->add_option("--head", analyze.head, "head entity label");
  analyze_cmd->add_option("--relation", analyze.relation, "relation label");
  analyze_cmd->add_option("--tail", analyze.tail, "tail entity label");
  analyze_cmd->add_option("--slot", analyze.slot, "text slot holding sentences (default: first with sentences)");
  analyze_cmd->add_option("--json", analyze.json_out, "also write results as JSON");

  auto* export_cmd = app.add_subcommand("export", "write entity vectors in the embedding file format");
  add_common(*export_cmd, common);
  export_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  export_cmd->add_option("--output", output, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*train_cmd) return cmd_train(common, out_dir, log_timing);
  if (*eval_cmd) return cmd_eval(common, checkpoint, split, json_out);
  if (*analyze_cmd) return cmd_analyze(common, checkpoint, analyze);
  return cmd_export(common, checkpoint, output);
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    spdlog::error("configuration: {}", e.what());
    return kConfig;
  } catch (const DataError& e) {
    spdlog::error("data: {}", e.what());
    return kData;
  } catch (const Diverged& e) {
    spdlog::error("diverged: {}", e.what());
    return kDiverged;
  } catch (const CheckpointMismatch& e) {
    spdlog::error("checkpoint mismatch: {}", e.what());
    return kCheckpoint;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hkge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hkge::cli
