/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stancy/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "stancy/checkpoint.hpp"
#include "stancy/config.hpp"
#include "stancy/data.hpp"
#include "stancy/errors.hpp"
#include "stancy/evaluation.hpp"
#include "stancy/interpret.hpp"
#include "stancy/io.hpp"
#include "stancy/text.hpp"
#include "stancy/training.hpp"

namespace stancy::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config_path;
  std::string raw_dir;
  std::string in_path;
  std::string out_path;
  std::string records_path;
  std::string data_path;
  std::string checkpoint_dir;
  std::string split = "test";
  std::string a_path;
  std::string b_path;
  std::string mode;
  std::string chunk_file;
  int top_k = -1;
  int min_count = -1;
  unsigned threads = 0;
  std::string claim;
  std::string perspective;
  bool json = false;
};

config::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return config::ExperimentConfig{};
  return config::ExperimentConfig::load(path);
}

void write_json(const fs::path& path, const ordered_json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

fs::path metrics_path_for(const fs::path& predictions) {
  fs::path p = predictions;
  p.replace_extension(".metrics.json");
  return p;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config_path);
  data::IngestSummary summary;
  const auto pairs = data::ingest_perspectrum(o.raw_dir, cfg.ingest, &summary);
  data::write_canonical(pairs, o.out_path);
  out << fmt::format("wrote {} pairs from {} claims to {} ({} dropped, {} duplicates)\n", pairs.size(),
                     summary.claims, o.out_path, summary.dropped, summary.duplicates);
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto pairs = data::read_canonical(o.in_path);
  const auto stats = data::compute_stats(pairs);
  out << data::format_stats_table(stats);
  if (!o.records_path.empty()) write_json(o.records_path, data::stats_records(stats));
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config_path);
  cfg.validate();
  const auto pairs = data::read_canonical(o.data_path);
  const auto train_pairs = data::filter_split(pairs, data::Split::kTrain);
  const auto dev_pairs = data::filter_split(pairs, data::Split::kDev);
  const auto result = train::train(cfg, train_pairs, dev_pairs, o.out_path);
  const auto& best = result.report.best();
  out << fmt::format("{} grid point(s); selected #{} lr={:g} batch={} dev macro-F1 {:.2f} (epoch {})\n",
                     result.report.runs.size(), best.index, best.point.learning_rate, best.point.batch_size,
                     best.best_dev_macro_f1, best.best_epoch);
  out << "checkpoint: " << result.report.checkpoint_path << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto loaded = checkpoint::load(o.checkpoint_dir);
  const auto pairs = data::filter_split(data::read_canonical(o.data_path), data::parse_split(o.split));
  if (pairs.empty()) throw InputError("no pairs in split " + o.split);
  const auto predictions = eval::predict_all(*loaded.classifier, pairs, o.threads);
  eval::write_predictions(o.out_path, predictions);
  const auto report = eval::evaluate(predictions, pairs);
  write_json(metrics_path_for(o.out_path), report.to_json());
  out << report.format_table();
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto result = eval::mcnemar(eval::read_predictions(o.a_path), eval::read_predictions(o.b_path));
  if (o.json) {
    out << result.to_json().dump(2) << "\n";
  } else {
    out << fmt::format("b (a right, b wrong) = {}\nc (a wrong, b right) = {}\nstatistic = {:.6f}\np_value = {:.6g}\n"
                       "method = {}\n",
                       result.b_count, result.c_count, result.statistic, result.p_value, result.method);
  }
  return kExitOk;
}

int cmd_interpret(const Options& o, std::ostream& out) {
  const auto loaded = checkpoint::load(o.checkpoint_dir);
  const auto* model = loaded.stancy();
  if (!model || model->variant() != model::Variant::kCons) {
    throw InputError("interpret requires a CONS checkpoint, got " + loaded.variant);
  }
  const auto& cfg = loaded.config;
  const std::string mode_name = o.mode.empty() ? cfg.interpret_mode : o.mode;
  interpret::SegmenterMode mode;
  if (mode_name == "unigram") {
    mode = interpret::SegmenterMode::kUnigram;
  } else if (mode_name == "chunk") {
    mode = interpret::SegmenterMode::kShallowChunk;
  } else {
    throw InputError("unknown segmentation mode '" + mode_name + "' (expected unigram or chunk)");
  }
  std::shared_ptr<interpret::ChunkFile> chunker;
  const std::string chunk_path = o.chunk_file.empty() ? cfg.interpret_chunk_file : o.chunk_file;
  if (mode == interpret::SegmenterMode::kShallowChunk && !chunk_path.empty()) {
    chunker = interpret::ChunkFile::load(chunk_path);
  }
  const auto pairs = data::filter_split(data::read_canonical(o.data_path), data::parse_split(o.split));

  const auto per_pair = interpret::attribute_corpus(*model, pairs, mode, chunker.get(), o.threads);
  std::vector<interpret::PhraseAttribution> all;
  std::string detail;
  for (const auto& list : per_pair) {
    for (const auto& a : list) {
      detail += interpret::to_json(a).dump() + "\n";
      all.push_back(a);
    }
  }
  const auto top_k = static_cast<std::size_t>(o.top_k >= 0 ? o.top_k : cfg.interpret_top_k);
  const auto min_count = static_cast<std::size_t>(o.min_count >= 0 ? o.min_count : cfg.interpret_min_count);
  const auto ranking = interpret::rank_phrases(all, top_k, min_count);

  const fs::path dir = o.out_path;
  fs::create_directories(dir);
  io::write_file_atomic(dir / "attributions.jsonl", detail);
  io::write_file_atomic(dir / "top_phrases.txt", ranking.format_table());
  write_json(dir / "top_phrases.json", ranking.to_json());
  out << ranking.format_table();
  out << fmt::format("{} attributions over {} pairs written to {}\n", all.size(), pairs.size(), dir.string());
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto loaded = checkpoint::load(o.checkpoint_dir);
  if (o.claim.empty() || o.perspective.empty()) throw InputError("claim and perspective must be non-empty");
  const auto claim = text::normalize_whitespace(o.claim);
  const auto perspective = text::normalize_whitespace(o.perspective);
  const auto p = loaded.classifier->predict(claim, perspective);
  if (o.json) {
    ordered_json j;
    j["variant"] = loaded.variant;
    j["label"] = data::label_name(p.label);
    j["probs"] = {{"SUPPORT", p.probs[0]}, {"OPPOSE", p.probs[1]}};
    if (p.cosine) j["cosine"] = *p.cosine;
    out << j.dump(2) << "\n";
  } else {
    out << fmt::format("variant: {}\nlabel: {}\np(SUPPORT): {:.6f}\np(OPPOSE): {:.6f}\n", loaded.variant,
                       data::label_name(p.label), p.probs[0], p.probs[1]);
    if (p.cosine) out << fmt::format("cosine: {:.6f}\n", *p.cosine);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistency-aware stance classification toolkit", "stancy"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Options o;

  auto* data_cmd = app.add_subcommand("data", "Dataset ingestion and statistics");
  data_cmd->require_subcommand(1);
  auto* ingest = data_cmd->add_subcommand("ingest", "Convert the raw Perspectrum release into canonical records");
  ingest->add_option("--raw", o.raw_dir, "Directory with the released json files")->required();
  ingest->add_option("--out", o.out_path, "Canonical output file")->required();
  ingest->add_option("--config", o.config_path, "Experiment config (label collapse, file names)");
  auto* stats = data_cmd->add_subcommand("stats", "Print per-split label counts");
  stats->add_option("--in", o.in_path, "Canonical data file")->required();
  stats->add_option("--records", o.records_path, "Also write the table as json records");

  auto* train_cmd = app.add_subcommand("train", "Grid-search fine-tuning with dev-set selection");
  train_cmd->add_option("--config", o.config_path, "Experiment config");
  train_cmd->add_option("--data", o.data_path, "Canonical data file")->required();
  train_cmd->add_option("--out", o.out_path, "Output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Predict a split and report metrics");
  eval_cmd->add_option("--checkpoint", o.checkpoint_dir, "Checkpoint directory")->required();
  eval_cmd->add_option("--data", o.data_path, "Canonical data file")->required();
  eval_cmd->add_option("--split", o.split, "train, dev or test")->capture_default_str();
  eval_cmd->add_option("--out", o.out_path, "Prediction file (jsonl)")->required();
  eval_cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");

  auto* compare = app.add_subcommand("compare", "McNemar test between two prediction files");
  compare->add_option("--a", o.a_path, "First prediction file")->required();
  compare->add_option("--b", o.b_path, "Second prediction file")->required();
  compare->add_flag("--json", o.json, "Print the result as json");

  auto* interp = app.add_subcommand("interpret", "Incremental phrase attribution and ranking");
  interp->add_option("--checkpoint", o.checkpoint_dir, "CONS checkpoint directory")->required();
  interp->add_option("--data", o.data_path, "Canonical data file")->required();
  interp->add_option("--split", o.split, "train, dev or test")->capture_default_str();
  interp->add_option("--mode", o.mode, "unigram or chunk");
  interp->add_option("--chunks", o.chunk_file, "Chunk file for --mode chunk");
  interp->add_option("--top-k", o.top_k, "Phrases per class");
  interp->add_option("--min-count", o.min_count, "Minimum occurrences per phrase");
  interp->add_option("--out", o.out_path, "Report directory")->required();
  interp->add_option("--threads", o.threads, "Worker threads (0 = hardware)");

  auto* predict = app.add_subcommand("predict", "Classify a single claim/perspective pair");
  predict->add_option("--checkpoint", o.checkpoint_dir, "Checkpoint directory")->required();
  predict->add_option("--claim", o.claim, "Claim text")->required();
  predict->add_option("--perspective", o.perspective, "Perspective text")->required();
  predict->add_flag("--json", o.json, "Print the prediction as json");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  if (rev.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (eval_cmd->parsed()) return cmd_eval(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    if (interp->parsed()) return cmd_interpret(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
  } catch (const ConfigError& e) {
    err << "invalid config:\n" << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace stancy::cli
