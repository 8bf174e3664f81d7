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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "stancy/data.hpp"

namespace stancy::config {

// Every experiment knob, serialized as one flat JSON object with dotted keys
// (e.g. "train.learning_rate"). Unspecified keys keep their defaults.
struct ExperimentConfig {
  std::uint64_t seed = 1234;
  // base | cons | lstm
  std::string variant = "cons";

  std::string encoder_name = "toy";
  std::string encoder_path;
  int encoder_layers = 2;
  int encoder_hidden_size = 32;
  int encoder_heads = 2;
  int encoder_intermediate_size = 128;
  int encoder_max_sequence_length = 512;
  bool encoder_lowercase = true;
  int encoder_vocab_min_count = 1;
  double encoder_initializer_range = 0.02;

  double learning_rate = 3e-5;
  int batch_size = 32;
  int epochs = 3;
  std::vector<double> grid_learning_rates;
  std::vector<int> grid_batch_sizes;
  double warmup_fraction = 0.0;
  double clip_norm = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double adam_weight_decay = 0.0;

  double cos_weight = 1.0;
  bool detach_cos_feature = false;

  std::string lstm_embeddings_path;
  int lstm_embedding_dim = 300;
  int lstm_hidden_size = 128;
  int lstm_dense_size = 256;

  std::string eval_split = "test";
  data::IngestOptions ingest;

  std::string interpret_mode = "unigram";
  int interpret_top_k = 25;
  int interpret_min_count = 2;
  std::string interpret_chunk_file;

  // Parses and validates; throws ConfigError listing every violation.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;

  std::vector<std::string> violations() const;
  void validate() const;

  // encoder.path, falling back to $STANCY_ENCODER_DIR.
  std::string resolved_encoder_path() const;
};

}  // namespace stancy::config
