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

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stancy/config.hpp"
#include "stancy/data.hpp"
#include "stancy/encoder.hpp"
#include "stancy/model.hpp"
#include "stancy/optim.hpp"

namespace stancy::train {

struct GridPoint {
  double learning_rate = 3e-5;
  int batch_size = 32;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double ce = 0.0;
  double cos = 0.0;
  double joint = 0.0;
  double train_accuracy = 0.0;  // percent, from the pre-update forward passes
  double dev_macro_f1 = 0.0;
  std::size_t steps = 0;  // cumulative optimizer steps
};

struct RunReport {
  std::size_t index = 0;
  GridPoint point;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_macro_f1 = 0.0;
  bool failed = false;
  std::string failure;
  std::size_t optimizer_steps = 0;
  std::string checkpoint_path;

  nlohmann::ordered_json to_json() const;
};

struct TrainReport {
  std::string variant;
  std::vector<RunReport> runs;
  std::size_t selected = 0;
  optim::AdamOptions adam;
  double clip_norm = 1.0;
  double warmup_fraction = 0.0;
  std::string checkpoint_path;

  const RunReport& best() const { return runs.at(selected); }
  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  TrainReport report;
  std::shared_ptr<model::Classifier> best_model;
};

// Cartesian product of the configured grid (learning-rate major); a single
// point from train.learning_rate / train.batch_size when no grid is given.
std::vector<GridPoint> grid_points(const config::ExperimentConfig& cfg);

// Index of the successful run with the highest dev macro-F1; ties go to the
// lower learning rate, then the smaller batch size. Throws TrainingError when
// no run succeeded.
std::size_t select_best(std::span<const RunReport> runs);

// Toy encoders get a word-level vocabulary built from the training texts;
// "bert" loads the pretrained directory from encoder.path / $STANCY_ENCODER_DIR.
encoder::Encoder build_encoder(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs);

// Runs every grid point for cfg.variant (base, cons or lstm). When `out_dir`
// is non-empty, writes grid-<i>/ and best/ checkpoints, config.json,
// train_report.json and train_epochs.jsonl there.
TrainResult train(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs,
                  std::span<const data::StancePair> dev_pairs, const std::filesystem::path& out_dir = {});

// Same protocol for the recurrent baseline; requires lstm.embeddings_path.
TrainResult train_lstm_baseline(const config::ExperimentConfig& cfg, std::span<const data::StancePair> train_pairs,
                                std::span<const data::StancePair> dev_pairs,
                                const std::filesystem::path& out_dir = {});

}  // namespace stancy::train
