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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stancy/autograd.hpp"
#include "stancy/safetensors.hpp"
#include "stancy/tokenizer.hpp"

namespace stancy::encoder {

struct EncoderSpec {
  // "toy" (randomly initialized, word-level vocabulary) or "bert" (pretrained).
  std::string name = "toy";
  int layers = 2;
  int hidden_size = 32;
  int attention_heads = 2;
  int intermediate_size = 128;
  int max_sequence_length = 512;
  int max_position_embeddings = 512;
  int type_vocab_size = 2;
  double layer_norm_eps = 1e-12;
  // Standard deviation of the random weight initialization.
  double initializer_range = 0.02;
  bool pretrained = false;
  std::shared_ptr<const Tokenizer> tokenizer;

  // 12 layers, 768 hidden, 12 heads.
  static EncoderSpec base_configuration();
  void validate() const;
  // Everything except the tokenizer, which is persisted as vocab.txt.
  nlohmann::ordered_json to_json() const;
  static EncoderSpec from_json(const nlohmann::json& j, std::shared_ptr<const Tokenizer> tokenizer);
};

struct PackedSequence {
  std::vector<int> token_ids;
  std::vector<int> segment_ids;
  std::vector<std::uint8_t> attention_mask;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const PackedSequence&) const = default;
};

// [CLS] claim [SEP] perspective [SEP]. Throws InputError on empty texts.
PackedSequence pack_pair(std::string_view claim, std::string_view perspective, const EncoderSpec& spec);
// [CLS] claim [SEP]
PackedSequence pack_claim_only(std::string_view claim, const EncoderSpec& spec);
// Token-level packing; an empty perspective yields [CLS] claim [SEP] [SEP].
// Over-long inputs lose perspective tail first, then claim tail, keeping at
// least one token of each non-empty segment while the budget allows.
PackedSequence pack_pair_ids(std::span<const int> claim_ids, std::span<const int> perspective_ids,
                             const EncoderSpec& spec);

// Number of pack_* calls that had to truncate (process-wide).
std::size_t truncation_count();
void reset_truncation_count();

struct PooledRepresentation {
  std::vector<double> vector;
};

// Bidirectional transformer encoder (BERT layout: post-LN blocks, GELU FFN).
// Parameters live in shared autograd leaves; copying an Encoder shares them,
// clone() deep-copies.
class Encoder {
 public:
  Encoder(EncoderSpec spec, std::uint64_t seed);
  Encoder(EncoderSpec spec, const safetensors::TensorMap& tensors);

  // Directory with config.json, vocab.txt and model.safetensors.
  static Encoder from_pretrained(const std::filesystem::path& dir, int max_sequence_length = 512);

  const EncoderSpec& spec() const { return spec_; }
  std::size_t hidden_size() const { return static_cast<std::size_t>(spec_.hidden_size); }

  // Differentiable last-layer hidden state at position 0 (1×H).
  ag::Tensor forward(const PackedSequence& seq) const;
  // Inference-mode forward; reentrant.
  PooledRepresentation encode(const PackedSequence& seq) const;

  const std::vector<std::pair<std::string, ag::Tensor>>& named_parameters() const { return params_; }
  safetensors::TensorMap export_tensors() const;
  Encoder clone() const;

 private:
  struct Layer {
    ag::Tensor wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };
  void allocate(const safetensors::TensorMap* tensors, std::uint64_t seed);
  void check_sequence(const PackedSequence& seq) const;

  EncoderSpec spec_;
  ag::Tensor word_emb_, pos_emb_, type_emb_, emb_ln_g_, emb_ln_b_;
  std::vector<Layer> layers_;
  std::vector<std::pair<std::string, ag::Tensor>> params_;
};

}  // namespace stancy::encoder
