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
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stancy/model.hpp"
#include "stancy/safetensors.hpp"
#include "stancy/tokenizer.hpp"

// Bidirectional-LSTM baseline: claim and perspective run through one shared
// BiLSTM over frozen pretrained word vectors; the four final hidden states
// feed a ReLU dense layer and a 2-way output layer.
namespace stancy::lstm {

class WordEmbeddings {
 public:
  // GloVe text format: `word v1 ... vD` per line. When `keep` is given only
  // those words are retained. Throws InputError if the file is missing or a
  // row has a dimension other than `dim`.
  static std::shared_ptr<const WordEmbeddings> load(const std::filesystem::path& path, int dim,
                                                    const std::unordered_set<std::string>* keep = nullptr);
  WordEmbeddings(int dim, std::unordered_map<std::string, std::vector<float>> rows);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  // Zero vector for out-of-vocabulary words.
  std::vector<double> lookup(const std::string& word) const;

 private:
  int dim_;
  std::unordered_map<std::string, std::vector<float>> rows_;
};

struct LstmSpec {
  int embedding_dim = 300;
  int hidden_size = 128;
  int dense_size = 256;
};

class LstmClassifier : public model::Classifier {
 public:
  LstmClassifier(std::shared_ptr<const WordEmbeddings> embeddings, LstmSpec spec, std::uint64_t seed);
  LstmClassifier(std::shared_ptr<const WordEmbeddings> embeddings, LstmSpec spec,
                 const safetensors::TensorMap& tensors);

  model::Prediction predict(std::string_view claim, std::string_view perspective) const override;
  using Classifier::predict;
  std::string variant_tag() const override { return "LSTM_BASELINE"; }

  // Concatenated final states (1 × 4·hidden) and logits (1 × 2).
  ag::Tensor features(std::string_view claim, std::string_view perspective) const;
  ag::Tensor logits(std::string_view claim, std::string_view perspective) const;
  model::LossTerms loss(const data::StancePair& pair) const;

  const LstmSpec& spec() const { return spec_; }
  std::size_t feature_size() const { return 4 * static_cast<std::size_t>(spec_.hidden_size); }
  std::size_t output_size() const { return out_w_.rows(); }
  std::vector<ag::Tensor> parameters() const;
  safetensors::TensorMap export_tensors() const;
  LstmClassifier clone() const;

 private:
  struct Direction {
    ag::Tensor w_ih, w_hh, bias;
  };
  void allocate(const safetensors::TensorMap* tensors, std::uint64_t seed);
  ag::Tensor run(const Direction& dir, const std::vector<ag::Tensor>& inputs, bool reverse) const;
  ag::Tensor encode_text(std::string_view text) const;

  std::shared_ptr<const WordEmbeddings> embeddings_;
  LstmSpec spec_;
  encoder::Tokenizer tokenizer_;
  Direction fwd_, bwd_;
  ag::Tensor dense_w_, dense_b_, out_w_, out_b_;
  std::vector<std::pair<std::string, ag::Tensor>> params_;
};

// Lowercased word tokens as the baseline sees them.
std::vector<std::string> lstm_tokens(std::string_view text);

}  // namespace stancy::lstm
