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

#include "stancy/model.hpp"

#include <algorithm>
#include <cmath>

#include "stancy/errors.hpp"
#include "stancy/kernels.hpp"
#include "stancy/random.hpp"

namespace stancy::model {

namespace {
constexpr double kCosineFloor = 1e-8;
constexpr double kProbFloor = 1e-12;
}  // namespace

StanceLabel argmax_label(std::span<const double> probs) {
  return probs[1] > probs[0] ? StanceLabel::kOppose : StanceLabel::kSupport;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("cosine_similarity: length mismatch");
  const double aa = kernels::dot(a, a);
  const double bb = kernels::dot(b, b);
  if (aa == 0.0 || bb == 0.0) throw NumericalError("cosine_similarity: zero-norm input");
  const double denom = std::max(std::sqrt(aa * bb), kCosineFloor);
  return std::clamp(kernels::dot(a, b) / denom, -1.0, 1.0);
}

double cosine_embedding_loss(std::span<const double> xc, std::span<const double> xpc, int y_sim) {
  if (y_sim != 1 && y_sim != -1) throw ContractError("cosine_embedding_loss: y_sim must be +1 or -1");
  const double c = cosine_similarity(xc, xpc);
  return y_sim == 1 ? 1.0 - c : std::max(0.0, c);
}

double cross_entropy_loss(std::span<const double> probs, StanceLabel gold, bool* clamped) {
  const double p = probs[data::label_index(gold)];
  if (clamped) *clamped = p < kProbFloor;
  return -std::log(std::max(p, kProbFloor));
}

double joint_loss(double ce, double cos) {
  if (ce < 0.0 || cos < 0.0) throw InputError("joint_loss: components must be non-negative");
  return ce + cos;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

ag::Tensor cosine_embedding_loss(const ag::Tensor& cosine, int y_sim) {
  if (y_sim == 1) return ag::add_scalar(ag::scale(cosine, -1.0), 1.0);
  if (y_sim == -1) return ag::relu(cosine);
  throw ContractError("cosine_embedding_loss: y_sim must be +1 or -1");
}

std::string_view variant_name(Variant v) { return v == Variant::kBase ? "BASE" : "CONS"; }

Variant parse_variant(std::string_view s) {
  if (s == "BASE" || s == "base") return Variant::kBase;
  if (s == "CONS" || s == "cons") return Variant::kCons;
  throw InputError("unknown model variant '" + std::string(s) + "'");
}

ClassifierHead ClassifierHead::random(std::size_t in_features, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(data::kNumLabels * in_features);
  for (auto& v : w) v = rng.normal(0.0, 0.02);
  return {ag::Tensor::parameter(data::kNumLabels, in_features, std::move(w))};
}

ClassifierHead ClassifierHead::zeros(std::size_t in_features) {
  return {ag::Tensor::parameter(data::kNumLabels, in_features, std::vector<double>(data::kNumLabels * in_features))};
}

StancyModel::StancyModel(Variant variant, encoder::Encoder encoder, ClassifierHead head, ModelOptions options)
    : variant_(variant), encoder_(std::move(encoder)), head_(std::move(head)), options_(options) {
  const std::size_t expected = encoder_.hidden_size() + (variant_ == Variant::kCons ? 1 : 0);
  if (!head_.weight.defined() || head_.weight.rows() != data::kNumLabels || head_.in_features() != expected) {
    throw ContractError("classifier head shape does not match variant " + std::string(variant_name(variant_)));
  }
}

StancyModel StancyModel::create(Variant variant, encoder::Encoder encoder, std::uint64_t seed, ModelOptions options) {
  const std::size_t d = encoder.hidden_size() + (variant == Variant::kCons ? 1 : 0);
  return StancyModel(variant, std::move(encoder), ClassifierHead::random(d, seed), options);
}

void StancyModel::pack(std::string_view claim, std::string_view perspective, encoder::PackedSequence& claim_seq,
                       encoder::PackedSequence& pair_seq) const {
  const auto& spec = encoder_.spec();
  if (claim.empty()) throw InputError("empty claim");
  const auto claim_ids = spec.tokenizer->encode(claim);
  const auto persp_ids = spec.tokenizer->encode(perspective);
  pair_seq = encoder::pack_pair_ids(claim_ids, persp_ids, spec);
  if (variant_ == Variant::kCons) claim_seq = encoder::pack_claim_only(claim, spec);
}

StancyModel::Logits StancyModel::logits(const encoder::PackedSequence& claim_seq,
                                        const encoder::PackedSequence& pair_seq) const {
  const ag::Tensor xpc = encoder_.forward(pair_seq);
  if (variant_ == Variant::kBase) return {ag::linear(xpc, head_.weight), {}};
  // Both passes share the encoder parameters.
  const ag::Tensor xc = encoder_.forward(claim_seq);
  const ag::Tensor cos = ag::cosine(xc, xpc, kCosineFloor);
  const ag::Tensor feature = ag::concat_cols({xpc, options_.detach_cos_feature ? ag::detach(cos) : cos});
  return {ag::linear(feature, head_.weight), cos};
}

Prediction StancyModel::to_prediction(const Logits& l) {
  Prediction p;
  const auto z = l.logits.value();
  const double mx = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - mx), e1 = std::exp(z[1] - mx);
  p.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  p.label = argmax_label(p.probs);
  if (l.cosine.defined()) p.cosine = l.cosine.item();
  return p;
}

Prediction StancyModel::predict(std::string_view claim, std::string_view perspective) const {
  ag::NoGradGuard guard;
  encoder::PackedSequence claim_seq, pair_seq;
  pack(claim, perspective, claim_seq, pair_seq);
  return to_prediction(logits(claim_seq, pair_seq));
}

Prediction StancyModel::forward_base(const data::StancePair& pair) const {
  if (variant_ != Variant::kBase) throw ContractError("forward_base called on a CONS model");
  return predict(pair.claim_text, pair.perspective_text);
}

Prediction StancyModel::forward_cons(const data::StancePair& pair) const {
  if (variant_ != Variant::kCons) throw ContractError("forward_cons called on a BASE model");
  return predict(pair.claim_text, pair.perspective_text);
}

LossTerms StancyModel::loss(const data::StancePair& pair) const {
  encoder::PackedSequence claim_seq, pair_seq;
  pack(pair.claim_text, pair.perspective_text, claim_seq, pair_seq);
  const Logits l = logits(claim_seq, pair_seq);
  LossTerms t;
  t.prediction = to_prediction(l);
  t.ce = ag::cross_entropy_logits(l.logits, data::label_index(pair.label));
  if (variant_ == Variant::kCons) {
    t.cos = cosine_embedding_loss(l.cosine, data::to_sim_target(pair.label));
    t.joint = options_.cos_weight == 0.0 ? t.ce : ag::add(t.ce, ag::scale(t.cos, options_.cos_weight));
  } else {
    t.joint = t.ce;
  }
  return t;
}

std::vector<ag::Tensor> StancyModel::parameters() const {
  std::vector<ag::Tensor> out;
  for (const auto& [name, t] : encoder_.named_parameters()) out.push_back(t);
  out.push_back(head_.weight);
  return out;
}

StancyModel StancyModel::clone() const {
  ClassifierHead head{ag::Tensor::parameter(head_.weight.rows(), head_.weight.cols(),
                                            std::vector<double>(head_.weight.value().begin(),
                                                                head_.weight.value().end()))};
  return StancyModel(variant_, encoder_.clone(), std::move(head), options_);
}

}  // namespace stancy::model
