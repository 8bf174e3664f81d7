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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stancy/autograd.hpp"
#include "stancy/data.hpp"
#include "stancy/encoder.hpp"

namespace stancy::model {

using data::StanceLabel;

struct Prediction {
  std::array<double, data::kNumLabels> probs{0.5, 0.5};
  StanceLabel label = StanceLabel::kSupport;
  // Present for the consistency-aware variant only.
  std::optional<double> cosine;

  double p_support() const { return probs[0]; }
};

// argmax over (SUPPORT, OPPOSE); exact ties go to SUPPORT.
StanceLabel argmax_label(std::span<const double> probs);

// --- losses on plain values -------------------------------------------------

// dot(a,b)/(|a||b|) clamped to [-1, 1], norm product floored at 1e-8.
// Throws NumericalError on a zero-norm input, InputError on a length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
// y_sim = +1: 1 - cos; y_sim = -1: max(0, cos). Throws ContractError otherwise.
double cosine_embedding_loss(std::span<const double> xc, std::span<const double> xpc, int y_sim);
// -log(max(probs[gold], 1e-12)); `clamped` reports whether the floor was hit.
double cross_entropy_loss(std::span<const double> probs, StanceLabel gold, bool* clamped = nullptr);
double joint_loss(double ce, double cos);
double mean(std::span<const double> values);

// --- differentiable counterparts -------------------------------------------

ag::Tensor cosine_embedding_loss(const ag::Tensor& cosine, int y_sim);

// --- classifiers ------------------------------------------------------------

enum class Variant { kBase, kCons };
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view s);

// Anything that maps (claim, perspective) to a stance distribution.
class Classifier {
 public:
  virtual ~Classifier() = default;
  // An empty perspective is allowed and denotes the bare-claim input.
  virtual Prediction predict(std::string_view claim, std::string_view perspective) const = 0;
  Prediction predict(const data::StancePair& pair) const { return predict(pair.claim_text, pair.perspective_text); }
  virtual std::string variant_tag() const = 0;
};

struct ModelOptions {
  // Weight of the consistency term in the joint objective.
  double cos_weight = 1.0;
  // Feed the cosine feature to the head without a gradient path.
  bool detach_cos_feature = false;
};

// Softmax head W (K×D) without bias: D = H for BASE, H + 1 for CONS.
struct ClassifierHead {
  ag::Tensor weight;

  static ClassifierHead random(std::size_t in_features, std::uint64_t seed);
  static ClassifierHead zeros(std::size_t in_features);
  std::size_t in_features() const { return weight.cols(); }
};

struct LossTerms {
  ag::Tensor ce;
  ag::Tensor cos;  // undefined for BASE
  ag::Tensor joint;
  Prediction prediction;
};

class StancyModel : public Classifier {
 public:
  StancyModel(Variant variant, encoder::Encoder encoder, ClassifierHead head, ModelOptions options = {});
  // Fresh head initialized from `seed`.
  static StancyModel create(Variant variant, encoder::Encoder encoder, std::uint64_t seed, ModelOptions options = {});

  Variant variant() const { return variant_; }
  const encoder::Encoder& encoder() const { return encoder_; }
  const ClassifierHead& head() const { return head_; }
  const ModelOptions& options() const { return options_; }
  ModelOptions& mutable_options() { return options_; }

  Prediction forward_base(const data::StancePair& pair) const;
  Prediction forward_cons(const data::StancePair& pair) const;
  Prediction predict(std::string_view claim, std::string_view perspective) const override;
  using Classifier::predict;
  std::string variant_tag() const override { return std::string(variant_name(variant_)); }

  // Recorded forward pass with the variant's training objective.
  LossTerms loss(const data::StancePair& pair) const;

  std::vector<ag::Tensor> parameters() const;
  StancyModel clone() const;

 private:
  struct Logits {
    ag::Tensor logits;
    ag::Tensor cosine;
  };
  Logits logits(const encoder::PackedSequence& claim_seq, const encoder::PackedSequence& pair_seq) const;
  static Prediction to_prediction(const Logits& l);
  void pack(std::string_view claim, std::string_view perspective, encoder::PackedSequence& claim_seq,
            encoder::PackedSequence& pair_seq) const;

  Variant variant_;
  encoder::Encoder encoder_;
  ClassifierHead head_;
  ModelOptions options_;
};

}  // namespace stancy::model
