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

#include "stancy/lstm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stancy/errors.hpp"
#include "stancy/random.hpp"

namespace stancy::lstm {

namespace {

encoder::Tokenizer make_basic_tokenizer() {
  return encoder::Tokenizer(encoder::Vocabulary({std::string(encoder::kPadToken), std::string(encoder::kUnkToken),
                                                 std::string(encoder::kClsToken), std::string(encoder::kSepToken)}),
                            encoder::TokenizerKind::kWordLevel, true);
}

}  // namespace

std::vector<std::string> lstm_tokens(std::string_view text) {
  static const encoder::Tokenizer tok = make_basic_tokenizer();
  return tok.basic_tokenize(text);
}

WordEmbeddings::WordEmbeddings(int dim, std::unordered_map<std::string, std::vector<float>> rows)
    : dim_(dim), rows_(std::move(rows)) {}

std::shared_ptr<const WordEmbeddings> WordEmbeddings::load(const std::filesystem::path& path, int dim,
                                                           const std::unordered_set<std::string>* keep) {
  if (path.empty() || !std::filesystem::is_regular_file(path)) {
    throw InputError("word-embedding table not found: " + (path.empty() ? std::string("<unset>") : path.string()));
  }
  std::ifstream in(path);
  std::unordered_map<std::string, std::vector<float>> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) continue;
    std::string word = line.substr(0, sp);
    if (keep && !keep->count(word)) continue;
    std::vector<float> v;
    v.reserve(static_cast<std::size_t>(dim));
    const char* p = line.c_str() + sp;
    char* end = nullptr;
    while (true) {
      const float f = std::strtof(p, &end);
      if (end == p) break;
      v.push_back(f);
      p = end;
    }
    if (static_cast<int>(v.size()) != dim) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": expected " + std::to_string(dim) +
                       " dimensions, found " + std::to_string(v.size()));
    }
    rows.emplace(std::move(word), std::move(v));
  }
  return std::make_shared<WordEmbeddings>(dim, std::move(rows));
}

std::vector<double> WordEmbeddings::lookup(const std::string& word) const {
  auto it = rows_.find(word);
  if (it == rows_.end()) return std::vector<double>(static_cast<std::size_t>(dim_), 0.0);
  return {it->second.begin(), it->second.end()};
}

LstmClassifier::LstmClassifier(std::shared_ptr<const WordEmbeddings> embeddings, LstmSpec spec, std::uint64_t seed)
    : embeddings_(std::move(embeddings)), spec_(spec), tokenizer_(make_basic_tokenizer()) {
  allocate(nullptr, seed);
}

LstmClassifier::LstmClassifier(std::shared_ptr<const WordEmbeddings> embeddings, LstmSpec spec,
                               const safetensors::TensorMap& tensors)
    : embeddings_(std::move(embeddings)), spec_(spec), tokenizer_(make_basic_tokenizer()) {
  allocate(&tensors, 0);
}

void LstmClassifier::allocate(const safetensors::TensorMap* tensors, std::uint64_t seed) {
  if (!embeddings_) throw InputError("LSTM baseline requires a word-embedding table");
  if (embeddings_->dim() != spec_.embedding_dim) throw InputError("word-embedding dimension mismatch");
  Rng rng(seed);
  const auto h = static_cast<std::size_t>(spec_.hidden_size);
  const auto e = static_cast<std::size_t>(spec_.embedding_dim);
  const auto dense = static_cast<std::size_t>(spec_.dense_size);
  auto make = [&](const std::string& name, std::size_t rows, std::size_t cols, double bound) {
    std::vector<double> values(rows * cols);
    if (tensors) {
      auto it = tensors->find(name);
      if (it == tensors->end() || it->second.values.size() != rows * cols) {
        throw CheckpointError("LSTM weights lack or mis-shape tensor " + name);
      }
      values = it->second.values;
    } else {
      for (auto& v : values) v = (2.0 * rng.uniform() - 1.0) * bound;
    }
    auto t = ag::Tensor::parameter(rows, cols, std::move(values));
    params_.emplace_back(name, t);
    return t;
  };
  const double rb = 1.0 / std::sqrt(static_cast<double>(h));
  fwd_ = {make("lstm.forward.w_ih", 4 * h, e, rb), make("lstm.forward.w_hh", 4 * h, h, rb),
          make("lstm.forward.bias", 1, 4 * h, rb)};
  bwd_ = {make("lstm.backward.w_ih", 4 * h, e, rb), make("lstm.backward.w_hh", 4 * h, h, rb),
          make("lstm.backward.bias", 1, 4 * h, rb)};
  const double db = 1.0 / std::sqrt(static_cast<double>(4 * h));
  dense_w_ = make("dense.weight", dense, 4 * h, db);
  dense_b_ = make("dense.bias", 1, dense, db);
  const double ob = 1.0 / std::sqrt(static_cast<double>(dense));
  out_w_ = make("output.weight", data::kNumLabels, dense, ob);
  out_b_ = make("output.bias", 1, data::kNumLabels, ob);
}

ag::Tensor LstmClassifier::run(const Direction& dir, const std::vector<ag::Tensor>& inputs, bool reverse) const {
  const auto h = static_cast<std::size_t>(spec_.hidden_size);
  ag::Tensor hidden = ag::Tensor::zeros(1, h);
  ag::Tensor cell = ag::Tensor::zeros(1, h);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const ag::Tensor& x = inputs[reverse ? inputs.size() - 1 - s : s];
    const ag::Tensor z = ag::add(ag::linear(x, dir.w_ih, dir.bias), ag::linear(hidden, dir.w_hh));
    const ag::Tensor i = ag::sigmoid(ag::slice_cols(z, 0, h));
    const ag::Tensor f = ag::sigmoid(ag::slice_cols(z, h, h));
    const ag::Tensor g = ag::tanh(ag::slice_cols(z, 2 * h, h));
    const ag::Tensor o = ag::sigmoid(ag::slice_cols(z, 3 * h, h));
    cell = ag::add(ag::mul(f, cell), ag::mul(i, g));
    hidden = ag::mul(o, ag::tanh(cell));
  }
  return hidden;
}

ag::Tensor LstmClassifier::encode_text(std::string_view text) const {
  std::vector<ag::Tensor> inputs;
  const auto e = static_cast<std::size_t>(spec_.embedding_dim);
  for (const auto& w : tokenizer_.basic_tokenize(text)) inputs.push_back(ag::Tensor::constant(1, e, embeddings_->lookup(w)));
  return ag::concat_cols({run(fwd_, inputs, false), run(bwd_, inputs, true)});
}

ag::Tensor LstmClassifier::features(std::string_view claim, std::string_view perspective) const {
  return ag::concat_cols({encode_text(claim), encode_text(perspective)});
}

ag::Tensor LstmClassifier::logits(std::string_view claim, std::string_view perspective) const {
  const ag::Tensor hidden = ag::relu(ag::linear(features(claim, perspective), dense_w_, dense_b_));
  return ag::linear(hidden, out_w_, out_b_);
}

model::Prediction LstmClassifier::predict(std::string_view claim, std::string_view perspective) const {
  ag::NoGradGuard guard;
  const auto z = logits(claim, perspective).value();
  const double mx = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - mx), e1 = std::exp(z[1] - mx);
  model::Prediction p;
  p.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  p.label = model::argmax_label(p.probs);
  return p;
}

model::LossTerms LstmClassifier::loss(const data::StancePair& pair) const {
  const ag::Tensor z = logits(pair.claim_text, pair.perspective_text);
  model::LossTerms t;
  const double mx = std::max(z.value()[0], z.value()[1]);
  const double e0 = std::exp(z.value()[0] - mx), e1 = std::exp(z.value()[1] - mx);
  t.prediction.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  t.prediction.label = model::argmax_label(t.prediction.probs);
  t.ce = ag::cross_entropy_logits(z, data::label_index(pair.label));
  t.joint = t.ce;
  return t;
}

std::vector<ag::Tensor> LstmClassifier::parameters() const {
  std::vector<ag::Tensor> out;
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

safetensors::TensorMap LstmClassifier::export_tensors() const {
  safetensors::TensorMap out;
  for (const auto& [name, t] : params_) {
    out.emplace(name, safetensors::TensorData{{t.rows(), t.cols()}, {t.value().begin(), t.value().end()}});
  }
  return out;
}

LstmClassifier LstmClassifier::clone() const { return LstmClassifier(embeddings_, spec_, export_tensors()); }

}  // namespace stancy::lstm
