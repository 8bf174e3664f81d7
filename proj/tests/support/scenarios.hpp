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

#include "stancy/config.hpp"

namespace stancy::testing {

// Toy-encoder CONS run used for the separable-set checks.
inline config::ExperimentConfig separable_config(int epochs = 5) {
  config::ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.variant = "cons";
  cfg.encoder_name = "toy";
  cfg.encoder_layers = 2;
  cfg.encoder_hidden_size = 32;
  cfg.encoder_heads = 2;
  cfg.encoder_intermediate_size = 64;
  cfg.encoder_max_sequence_length = 64;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 8;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace stancy::testing
