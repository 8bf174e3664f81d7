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

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_set>

#include "stancy/config.hpp"
#include "stancy/lstm.hpp"
#include "stancy/model.hpp"

// Checkpoint directory layout:
//   meta.json            variant tag, encoder spec / LSTM spec, head shape, model options
//   config.json          the exact experiment config used
//   vocab.txt            encoder vocabulary (transformer variants)
//   encoder.safetensors  encoder parameters (F64)
//   head.safetensors     classifier head (F64)
//   lstm.safetensors     all baseline parameters (LSTM_BASELINE only)
// Directories are written under a temporary name and renamed into place.
namespace stancy::checkpoint {

void save(const std::filesystem::path& dir, const model::StancyModel& model, const config::ExperimentConfig& cfg);
void save(const std::filesystem::path& dir, const lstm::LstmClassifier& model, const config::ExperimentConfig& cfg);
// Dispatches on the dynamic type; throws ContractError for unknown classifiers.
void save(const std::filesystem::path& dir, const model::Classifier& model, const config::ExperimentConfig& cfg);

struct Loaded {
  std::string variant;  // BASE, CONS or LSTM_BASELINE
  config::ExperimentConfig config;
  std::shared_ptr<model::Classifier> classifier;

  // nullptr for the LSTM baseline.
  const model::StancyModel* stancy() const { return dynamic_cast<const model::StancyModel*>(classifier.get()); }
};

// `lstm_vocabulary`, when provided, restricts the word-vector table loaded for
// the LSTM baseline to those words. Throws CheckpointError on corrupt input.
Loaded load(const std::filesystem::path& dir, const std::unordered_set<std::string>* lstm_vocabulary = nullptr);

}  // namespace stancy::checkpoint
