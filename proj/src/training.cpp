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

#include "stancy/training.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "stancy/checkpoint.hpp"
#include "stancy/errors.hpp"
#include "stancy/evaluation.hpp"
#include "stancy/io.hpp"
#include "stancy/lstm.hpp"
#include "stancy/random.hpp"

namespace stancy::train {

namespace fs = std::filesystem;

namespace {

// Seed streams fanned out from the single config seed.
constexpr std::uint64_t kEncoderInitStream = 1;
constexpr std::uint64_t kHeadInitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kLstmInitStream = 4;

}  // namespace

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["learning_rate"] = point.learning_rate;
  j["batch_size"] = point.batch_size;
  j["failed"] = failed;
  if (failed) j["failure"] = failure;
  j["best_epoch"] = best_epoch;
  j["best_dev_macro_f1"] = best_dev_macro_f1;
  j["optimizer_steps"] = optimizer_steps;
  j["checkpoint_path"] = checkpoint_path;
  auto& eps = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    eps.push_back({{"epoch", e.epoch},
                   {"ce", e.ce},
                   {"cos", e.cos},
                   {"joint", e.joint},
                   {"train_accuracy", e.train_accuracy},
                   {"dev_macro_f1", e.dev_macro_f1},
                   {"steps", e.steps}});
  }
  return j;
}

nlohmann::ordered_json TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = variant;
  j["selected"] = selected;
  j["checkpoint_path"] = checkpoint_path;
  j["optimizer"] = {{"name", "adam"},
                    {"beta1", adam.beta1},
                    {"beta2", adam.beta2},
                    {"eps", adam.eps},
                    {"weight_decay", adam.weight_decay},
                    {"clip_norm", clip_norm},
                    {"warmup_fraction", warmup_fraction}};
  auto& rs = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) rs.push_back(r.to_json());
  return j;
}

std::vector<GridPoint> grid_points(const config::ExperimentConfig& cfg) {
  std::vector<double> lrs = cfg.grid_learning_rates;
  std::vector<int> bss = cfg.grid_batch_sizes;
  if (lrs.empty()) lrs.push_back(cfg.learning_rate);
  if (bss.empty()) bss.push_back(cfg.batch_size);
  std::vector<GridPoint> out;
  for (double lr : lrs) {
    for (int bs : bss) out.push_back({lr, bs});
  }
  return out;
}

std::size_t select_best(std::span<const RunReport> runs) {
  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.failed) continue;
    if (best == runs.size()) {
      best = i;
      continue;
    }
    const auto& b = runs[best];
    const bool better = r.best_dev_macro_f1 > b.best_dev_macro_f1 ||
                        (r.best_dev_macro_f1 == b.best_dev_macro_f1 &&
                         (r.point.learning_rate < b.point.learning_rate ||
                          (r.point.learning_rate == b.point.learning_rate && r.point.batch_size < b.point.batch_size)));
    if (better) best = i;
  }
  if (best == runs.size()) throw TrainingError("no grid point trained successfully");
  return best;
}

encoder::Encoder build_encoder(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs) {
  if (cfg.encoder_name == "bert") {
    const std::string path = cfg.resolved_encoder_path();
    if (path.empty()) throw ConfigError({"encoder.path (or STANCY_ENCODER_DIR) is required for encoder.name=bert"});
    return encoder::Encoder::from_pretrained(path, cfg.encoder_max_sequence_length);
  }
  std::vector<std::string> texts;
  texts.reserve(2 * train_pairs.size());
  for (const auto& p : train_pairs) {
    texts.push_back(p.claim_text);
    texts.push_back(p.perspective_text);
  }
  encoder::EncoderSpec spec;
  spec.name = "toy";
  spec.layers = cfg.encoder_layers;
  spec.hidden_size = cfg.encoder_hidden_size;
  spec.attention_heads = cfg.encoder_heads;
  spec.intermediate_size = cfg.encoder_intermediate_size;
  spec.max_sequence_length = cfg.encoder_max_sequence_length;
  spec.max_position_embeddings = cfg.encoder_max_sequence_length;
  spec.initializer_range = cfg.encoder_initializer_range;
  spec.tokenizer = std::make_shared<encoder::Tokenizer>(
      encoder::build_word_vocabulary(texts, cfg.encoder_lowercase, static_cast<std::size_t>(cfg.encoder_vocab_min_count)),
      encoder::TokenizerKind::kWordLevel, cfg.encoder_lowercase);
  return encoder::Encoder(std::move(spec), derive_seed(cfg.seed, kEncoderInitStream));
}

namespace {

template <class Model>
struct RunOutcome {
  RunReport report;
  std::shared_ptr<Model> best;
};

template <class Model>
RunOutcome<Model> run_point(const config::ExperimentConfig& cfg, Model model, const GridPoint& point,
                            std::span<const data::StancePair> train_pairs, std::span<const data::StancePair> dev_pairs) {
  RunOutcome<Model> out;
  out.report.point = point;
  const auto params = model.parameters();
  optim::Adam adam(params, {point.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.adam_weight_decay});
  Rng rng(derive_seed(cfg.seed, kShuffleStream));

  const std::size_t n = train_pairs.size();
  const std::size_t bs = static_cast<std::size_t>(point.batch_size);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  const auto warmup_steps = static_cast<std::size_t>(std::floor(cfg.warmup_fraction * static_cast<double>(total_steps)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  out.report.best_dev_macro_f1 = -1.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double ce_sum = 0.0, cos_sum = 0.0, joint_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      const double inv = 1.0 / static_cast<double>(end - start);
      adam.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = train_pairs[order[k]];
        auto terms = model.loss(pair);
        const double joint = terms.joint.item();
        if (!std::isfinite(joint)) {
          out.report.failed = true;
          out.report.failure = "non-finite loss at epoch " + std::to_string(epoch);
          return out;
        }
        ce_sum += terms.ce.item();
        if (terms.cos.defined()) cos_sum += terms.cos.item();
        joint_sum += joint;
        if (terms.prediction.label == pair.label) ++correct;
        ag::scale(terms.joint, inv).backward();
      }
      optim::clip_grad_norm(params, cfg.clip_norm);
      const std::size_t step = adam.steps();
      const double lr = step < warmup_steps
                            ? point.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup_steps)
                            : point.learning_rate;
      adam.step(lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.ce = ce_sum / static_cast<double>(n);
    rec.cos = cos_sum / static_cast<double>(n);
    rec.joint = joint_sum / static_cast<double>(n);
    rec.train_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    rec.dev_macro_f1 = eval::evaluate(model, dev_pairs).macro_f1;
    rec.steps = adam.steps();
    out.report.epochs.push_back(rec);
    if (rec.dev_macro_f1 > out.report.best_dev_macro_f1) {
      out.report.best_dev_macro_f1 = rec.dev_macro_f1;
      out.report.best_epoch = epoch;
      out.best = std::make_shared<Model>(model.clone());
    }
  }
  out.report.optimizer_steps = adam.steps();
  return out;
}

template <class Factory>
TrainResult run_grid(const config::ExperimentConfig& cfg, std::string variant, Factory make_model,
                     std::span<const data::StancePair> train_pairs, std::span<const data::StancePair> dev_pairs,
                     const fs::path& out_dir) {
  if (train_pairs.empty()) throw InputError("training split is empty");
  if (dev_pairs.empty()) throw InputError("dev split is empty");
  cfg.validate();
  TrainResult result;
  auto& report = result.report;
  report.variant = std::move(variant);
  report.adam = {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.adam_weight_decay};
  report.clip_norm = cfg.clip_norm;
  report.warmup_fraction = cfg.warmup_fraction;

  std::vector<std::shared_ptr<model::Classifier>> bests;
  const auto points = grid_points(cfg);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto outcome = run_point(cfg, make_model(), points[i], train_pairs, dev_pairs);
    outcome.report.index = i;
    if (!out_dir.empty() && !outcome.report.failed && outcome.best) {
      const fs::path dir = out_dir / ("grid-" + std::to_string(i));
      checkpoint::save(dir, *outcome.best, cfg);
      outcome.report.checkpoint_path = dir.string();
    }
    report.runs.push_back(std::move(outcome.report));
    bests.push_back(outcome.best);
  }
  report.selected = select_best(report.runs);
  result.best_model = bests[report.selected];
  if (!out_dir.empty()) {
    const fs::path best_dir = out_dir / "best";
    checkpoint::save(best_dir, *result.best_model, cfg);
    report.checkpoint_path = best_dir.string();
    cfg.save(out_dir / "config.json");
    io::write_file_atomic(out_dir / "train_report.json", report.to_json().dump(2) + "\n");
    std::string lines;
    for (const auto& r : report.runs) {
      for (const auto& e : r.epochs) {
        nlohmann::ordered_json j;
        j["grid_index"] = r.index;
        j["learning_rate"] = r.point.learning_rate;
        j["batch_size"] = r.point.batch_size;
        j["epoch"] = e.epoch;
        j["ce"] = e.ce;
        j["cos"] = e.cos;
        j["joint"] = e.joint;
        j["train_accuracy"] = e.train_accuracy;
        j["dev_macro_f1"] = e.dev_macro_f1;
        lines += j.dump() + "\n";
      }
    }
    io::write_file_atomic(out_dir / "train_epochs.jsonl", lines);
  }
  return result;
}

}  // namespace

TrainResult train(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs,
                  std::span<const data::StancePair> dev_pairs, const fs::path& out_dir) {
  if (cfg.variant == "lstm") return train_lstm_baseline(cfg, train_pairs, dev_pairs, out_dir);
  const auto variant = model::parse_variant(cfg.variant);
  model::ModelOptions options{cfg.cos_weight, cfg.detach_cos_feature};
  // One encoder instance is built (and, for bert, loaded) once; each grid point
  // starts from a deep copy so every point sees identical initial weights.
  const encoder::Encoder initial = build_encoder(cfg, train_pairs);
  const std::uint64_t head_seed = derive_seed(cfg.seed, kHeadInitStream);
  auto factory = [&] { return model::StancyModel::create(variant, initial.clone(), head_seed, options); };
  return run_grid(cfg, std::string(model::variant_name(variant)), factory, train_pairs, dev_pairs, out_dir);
}

TrainResult train_lstm_baseline(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs,
                                std::span<const data::StancePair> dev_pairs, const fs::path& out_dir) {
  std::unordered_set<std::string> words;
  for (auto span : {train_pairs, dev_pairs}) {
    for (const auto& p : span) {
      for (auto& w : lstm::lstm_tokens(p.claim_text)) words.insert(w);
      for (auto& w : lstm::lstm_tokens(p.perspective_text)) words.insert(w);
    }
  }
  auto table = lstm::WordEmbeddings::load(cfg.lstm_embeddings_path, cfg.lstm_embedding_dim, &words);
  const lstm::LstmSpec spec{cfg.lstm_embedding_dim, cfg.lstm_hidden_size, cfg.lstm_dense_size};
  const std::uint64_t seed = derive_seed(cfg.seed, kLstmInitStream);
  auto factory = [&] { return lstm::LstmClassifier(table, spec, seed); };
  return run_grid(cfg, "LSTM_BASELINE", factory, train_pairs, dev_pairs, out_dir);
}

}  // namespace stancy::train
