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

#include "stancy/encoder.hpp"

#include <atomic>
#include <cmath>

#include "stancy/errors.hpp"
#include "stancy/io.hpp"
#include "stancy/random.hpp"

namespace stancy::encoder {

namespace {
std::atomic<std::size_t> g_truncations{0};
}  // namespace

std::size_t truncation_count() { return g_truncations.load(); }
void reset_truncation_count() { g_truncations.store(0); }

EncoderSpec EncoderSpec::base_configuration() {
  EncoderSpec s;
  s.name = "bert";
  s.layers = 12;
  s.hidden_size = 768;
  s.attention_heads = 12;
  s.intermediate_size = 3072;
  s.pretrained = true;
  return s;
}

void EncoderSpec::validate() const {
  if (hidden_size <= 0) throw InputError("encoder hidden_size must be > 0");
  if (layers <= 0) throw InputError("encoder layers must be > 0");
  if (attention_heads <= 0 || hidden_size % attention_heads != 0) {
    throw InputError("encoder hidden_size must be a positive multiple of attention_heads");
  }
  if (intermediate_size <= 0) throw InputError("encoder intermediate_size must be > 0");
  if (max_sequence_length < 3) throw InputError("encoder max_sequence_length must be >= 3");
  if (max_sequence_length > max_position_embeddings) {
    throw InputError("encoder max_sequence_length exceeds max_position_embeddings");
  }
  if (type_vocab_size < 2) throw InputError("encoder type_vocab_size must be >= 2");
  if (!tokenizer) throw InputError("encoder has no tokenizer/vocabulary");
}

nlohmann::ordered_json EncoderSpec::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["layers"] = layers;
  j["hidden_size"] = hidden_size;
  j["attention_heads"] = attention_heads;
  j["intermediate_size"] = intermediate_size;
  j["max_sequence_length"] = max_sequence_length;
  j["max_position_embeddings"] = max_position_embeddings;
  j["type_vocab_size"] = type_vocab_size;
  j["layer_norm_eps"] = layer_norm_eps;
  j["initializer_range"] = initializer_range;
  j["pretrained"] = pretrained;
  if (tokenizer) {
    j["tokenizer"] = tokenizer->kind() == TokenizerKind::kWordPiece ? "wordpiece" : "word";
    j["lowercase"] = tokenizer->lowercase();
  }
  return j;
}

EncoderSpec EncoderSpec::from_json(const nlohmann::json& j, std::shared_ptr<const Tokenizer> tokenizer) {
  EncoderSpec s;
  s.name = j.at("name").get<std::string>();
  s.layers = j.at("layers").get<int>();
  s.hidden_size = j.at("hidden_size").get<int>();
  s.attention_heads = j.at("attention_heads").get<int>();
  s.intermediate_size = j.at("intermediate_size").get<int>();
  s.max_sequence_length = j.at("max_sequence_length").get<int>();
  s.max_position_embeddings = j.at("max_position_embeddings").get<int>();
  s.type_vocab_size = j.at("type_vocab_size").get<int>();
  s.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  s.initializer_range = j.value("initializer_range", 0.02);
  s.pretrained = j.at("pretrained").get<bool>();
  s.tokenizer = std::move(tokenizer);
  return s;
}

PackedSequence pack_pair_ids(std::span<const int> claim_ids, std::span<const int> perspective_ids,
                             const EncoderSpec& spec) {
  const Vocabulary& v = spec.tokenizer->vocab();
  const std::size_t budget = static_cast<std::size_t>(spec.max_sequence_length) - 3;
  std::size_t c = claim_ids.size(), p = perspective_ids.size();
  if (c + p > budget) {
    g_truncations.fetch_add(1);
    std::size_t over = c + p - budget;
    const std::size_t cut_p = std::min(over, p - std::min<std::size_t>(p, 1));
    p -= cut_p;
    over -= cut_p;
    const std::size_t cut_c = std::min(over, c - std::min<std::size_t>(c, 1));
    c -= cut_c;
    over -= cut_c;
    const std::size_t cut_p2 = std::min(over, p);
    p -= cut_p2;
    over -= cut_p2;
    c -= std::min(over, c);
  }
  PackedSequence seq;
  seq.token_ids.reserve(c + p + 3);
  seq.token_ids.push_back(v.cls_id());
  seq.token_ids.insert(seq.token_ids.end(), claim_ids.begin(), claim_ids.begin() + static_cast<long>(c));
  seq.token_ids.push_back(v.sep_id());
  seq.segment_ids.assign(seq.token_ids.size(), 0);
  seq.token_ids.insert(seq.token_ids.end(), perspective_ids.begin(), perspective_ids.begin() + static_cast<long>(p));
  seq.token_ids.push_back(v.sep_id());
  seq.segment_ids.resize(seq.token_ids.size(), 1);
  seq.attention_mask.assign(seq.token_ids.size(), 1);
  return seq;
}

PackedSequence pack_pair(std::string_view claim, std::string_view perspective, const EncoderSpec& spec) {
  if (claim.empty()) throw InputError("pack_pair: empty claim");
  if (perspective.empty()) throw InputError("pack_pair: empty perspective");
  const auto c = spec.tokenizer->encode(claim);
  const auto p = spec.tokenizer->encode(perspective);
  return pack_pair_ids(c, p, spec);
}

PackedSequence pack_claim_only(std::string_view claim, const EncoderSpec& spec) {
  if (claim.empty()) throw InputError("pack_claim_only: empty claim");
  const Vocabulary& v = spec.tokenizer->vocab();
  auto ids = spec.tokenizer->encode(claim);
  const std::size_t budget = static_cast<std::size_t>(spec.max_sequence_length) - 2;
  if (ids.size() > budget) {
    g_truncations.fetch_add(1);
    ids.resize(budget);
  }
  PackedSequence seq;
  seq.token_ids.push_back(v.cls_id());
  seq.token_ids.insert(seq.token_ids.end(), ids.begin(), ids.end());
  seq.token_ids.push_back(v.sep_id());
  seq.segment_ids.assign(seq.token_ids.size(), 0);
  seq.attention_mask.assign(seq.token_ids.size(), 1);
  return seq;
}

namespace {

const safetensors::TensorData* find_tensor(const safetensors::TensorMap& m, const std::string& name) {
  std::vector<std::string> candidates{name, "bert." + name};
  // Older TF-converted checkpoints name LayerNorm parameters gamma/beta.
  auto swap_suffix = [](const std::string& n, std::string_view from, std::string_view to) -> std::string {
    if (n.size() >= from.size() && n.compare(n.size() - from.size(), from.size(), from) == 0) {
      return n.substr(0, n.size() - from.size()) + std::string(to);
    }
    return {};
  };
  if (name.find("LayerNorm") != std::string::npos) {
    for (const auto& alt : {swap_suffix(name, ".weight", ".gamma"), swap_suffix(name, ".bias", ".beta")}) {
      if (!alt.empty()) {
        candidates.push_back(alt);
        candidates.push_back("bert." + alt);
      }
    }
  }
  for (const auto& c : candidates) {
    auto it = m.find(c);
    if (it != m.end()) return &it->second;
  }
  return nullptr;
}

}  // namespace

Encoder::Encoder(EncoderSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  allocate(nullptr, seed);
}

Encoder::Encoder(EncoderSpec spec, const safetensors::TensorMap& tensors) : spec_(std::move(spec)) {
  spec_.validate();
  allocate(&tensors, 0);
}

void Encoder::allocate(const safetensors::TensorMap* tensors, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t h = hidden_size();
  const std::size_t inter = static_cast<std::size_t>(spec_.intermediate_size);
  enum class Init { kNormal, kZero, kOne };
  auto make = [&](const std::string& name, std::size_t rows, std::size_t cols, Init init) {
    std::vector<double> values(rows * cols);
    if (tensors) {
      const auto* t = find_tensor(*tensors, name);
      if (!t) throw CheckpointError("encoder weights lack tensor " + name);
      std::size_t count = 1;
      for (auto d : t->shape) count *= d;
      if (count != rows * cols) throw CheckpointError("encoder tensor " + name + " has unexpected shape");
      values = t->values;
    } else {
      for (auto& v : values) {
        v = init == Init::kNormal ? rng.normal(0.0, spec_.initializer_range) : (init == Init::kOne ? 1.0 : 0.0);
      }
    }
    auto p = ag::Tensor::parameter(rows, cols, std::move(values));
    params_.emplace_back(name, p);
    return p;
  };

  const std::size_t vocab = spec_.tokenizer->vocab().size();
  word_emb_ = make("embeddings.word_embeddings.weight", vocab, h, Init::kNormal);
  pos_emb_ = make("embeddings.position_embeddings.weight", static_cast<std::size_t>(spec_.max_position_embeddings), h,
                  Init::kNormal);
  type_emb_ = make("embeddings.token_type_embeddings.weight", static_cast<std::size_t>(spec_.type_vocab_size), h,
                   Init::kNormal);
  emb_ln_g_ = make("embeddings.LayerNorm.weight", 1, h, Init::kOne);
  emb_ln_b_ = make("embeddings.LayerNorm.bias", 1, h, Init::kZero);
  for (int i = 0; i < spec_.layers; ++i) {
    const std::string p = "encoder.layer." + std::to_string(i) + ".";
    Layer l;
    l.wq = make(p + "attention.self.query.weight", h, h, Init::kNormal);
    l.bq = make(p + "attention.self.query.bias", 1, h, Init::kZero);
    l.wk = make(p + "attention.self.key.weight", h, h, Init::kNormal);
    l.bk = make(p + "attention.self.key.bias", 1, h, Init::kZero);
    l.wv = make(p + "attention.self.value.weight", h, h, Init::kNormal);
    l.bv = make(p + "attention.self.value.bias", 1, h, Init::kZero);
    l.wo = make(p + "attention.output.dense.weight", h, h, Init::kNormal);
    l.bo = make(p + "attention.output.dense.bias", 1, h, Init::kZero);
    l.ln1_g = make(p + "attention.output.LayerNorm.weight", 1, h, Init::kOne);
    l.ln1_b = make(p + "attention.output.LayerNorm.bias", 1, h, Init::kZero);
    l.w1 = make(p + "intermediate.dense.weight", inter, h, Init::kNormal);
    l.b1 = make(p + "intermediate.dense.bias", 1, inter, Init::kZero);
    l.w2 = make(p + "output.dense.weight", h, inter, Init::kNormal);
    l.b2 = make(p + "output.dense.bias", 1, h, Init::kZero);
    l.ln2_g = make(p + "output.LayerNorm.weight", 1, h, Init::kOne);
    l.ln2_b = make(p + "output.LayerNorm.bias", 1, h, Init::kZero);
    layers_.push_back(std::move(l));
  }
}

Encoder Encoder::from_pretrained(const std::filesystem::path& dir, int max_sequence_length) {
  const auto config_path = dir / "config.json";
  const auto vocab_path = dir / "vocab.txt";
  const auto weights_path = dir / "model.safetensors";
  for (const auto& p : {config_path, vocab_path}) {
    if (!std::filesystem::is_regular_file(p)) throw CheckpointError("pretrained encoder lacks " + p.string());
  }
  if (!std::filesystem::is_regular_file(weights_path)) {
    throw CheckpointError("pretrained encoder lacks " + weights_path.string() +
                          " (convert PyTorch .bin weights to safetensors first)");
  }
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(io::read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed " + config_path.string() + ": " + e.what());
  }
  if (cfg.value("hidden_act", std::string("gelu")) != "gelu") {
    throw CheckpointError("only gelu encoders are supported");
  }
  bool lowercase = true;
  if (std::filesystem::is_regular_file(dir / "tokenizer_config.json")) {
    auto tc = nlohmann::json::parse(io::read_file(dir / "tokenizer_config.json"));
    lowercase = tc.value("do_lower_case", true);
  }
  EncoderSpec spec;
  spec.name = "bert";
  spec.layers = cfg.at("num_hidden_layers").get<int>();
  spec.hidden_size = cfg.at("hidden_size").get<int>();
  spec.attention_heads = cfg.at("num_attention_heads").get<int>();
  spec.intermediate_size = cfg.at("intermediate_size").get<int>();
  spec.max_position_embeddings = cfg.value("max_position_embeddings", 512);
  spec.max_sequence_length = std::min(max_sequence_length, spec.max_position_embeddings);
  spec.type_vocab_size = cfg.value("type_vocab_size", 2);
  spec.layer_norm_eps = cfg.value("layer_norm_eps", 1e-12);
  spec.initializer_range = cfg.value("initializer_range", 0.02);
  spec.pretrained = true;
  spec.tokenizer = std::make_shared<Tokenizer>(Vocabulary::load(vocab_path), TokenizerKind::kWordPiece, lowercase);
  return Encoder(std::move(spec), safetensors::load(weights_path));
}

void Encoder::check_sequence(const PackedSequence& seq) const {
  const std::size_t n = seq.size();
  if (n == 0) throw ContractError("encode: empty sequence");
  if (n > static_cast<std::size_t>(spec_.max_sequence_length)) {
    throw ContractError("encode: sequence length " + std::to_string(n) + " exceeds max_sequence_length");
  }
  if (seq.segment_ids.size() != n || seq.attention_mask.size() != n) {
    throw ContractError("encode: token/segment/mask lengths differ");
  }
  const auto vocab = static_cast<int>(spec_.tokenizer->vocab().size());
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.token_ids[i] < 0 || seq.token_ids[i] >= vocab) throw ContractError("encode: token id out of range");
    if (seq.segment_ids[i] < 0 || seq.segment_ids[i] >= spec_.type_vocab_size) {
      throw ContractError("encode: segment id out of range");
    }
  }
}

ag::Tensor Encoder::forward(const PackedSequence& seq) const {
  check_sequence(seq);
  const std::size_t n = seq.size();
  const std::size_t h = hidden_size();
  const std::size_t heads = static_cast<std::size_t>(spec_.attention_heads);
  const std::size_t d = h / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<int> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);
  ag::Tensor x = ag::add(ag::add(ag::embedding(word_emb_, seq.token_ids), ag::embedding(pos_emb_, positions)),
                         ag::embedding(type_emb_, seq.segment_ids));
  x = ag::layer_norm(x, emb_ln_g_, emb_ln_b_, spec_.layer_norm_eps);

  // Masked keys receive a large negative score in every query row.
  std::vector<double> mask(n * n, 0.0);
  bool any_masked = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (!seq.attention_mask[j]) {
      any_masked = true;
      for (std::size_t i = 0; i < n; ++i) mask[i * n + j] = -10000.0;
    }
  }

  for (const Layer& l : layers_) {
    const ag::Tensor q = ag::linear(x, l.wq, l.bq);
    const ag::Tensor k = ag::linear(x, l.wk, l.bk);
    const ag::Tensor v = ag::linear(x, l.wv, l.bv);
    std::vector<ag::Tensor> contexts;
    contexts.reserve(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const ag::Tensor qh = ag::slice_cols(q, hd * d, d);
      const ag::Tensor kh = ag::slice_cols(k, hd * d, d);
      const ag::Tensor vh = ag::slice_cols(v, hd * d, d);
      ag::Tensor scores = ag::scale(ag::matmul_nt(qh, kh), inv_sqrt_d);
      if (any_masked) scores = ag::add_constant(scores, mask);
      contexts.push_back(ag::matmul(ag::softmax_rows(scores), vh));
    }
    const ag::Tensor attn = ag::linear(heads == 1 ? contexts.front() : ag::concat_cols(contexts), l.wo, l.bo);
    x = ag::layer_norm(ag::add(attn, x), l.ln1_g, l.ln1_b, spec_.layer_norm_eps);
    const ag::Tensor ff = ag::linear(ag::gelu(ag::linear(x, l.w1, l.b1)), l.w2, l.b2);
    x = ag::layer_norm(ag::add(ff, x), l.ln2_g, l.ln2_b, spec_.layer_norm_eps);
  }
  return ag::row(x, 0);
}

PooledRepresentation Encoder::encode(const PackedSequence& seq) const {
  ag::NoGradGuard guard;
  const ag::Tensor pooled = forward(seq);
  PooledRepresentation out{std::vector<double>(pooled.value().begin(), pooled.value().end())};
  for (double v : out.vector) {
    if (!std::isfinite(v)) throw NumericalError("encode: non-finite pooled representation");
  }
  return out;
}

safetensors::TensorMap Encoder::export_tensors() const {
  safetensors::TensorMap out;
  for (const auto& [name, t] : params_) {
    safetensors::TensorData d;
    d.shape = t.rows() == 1 ? std::vector<std::size_t>{t.cols()} : std::vector<std::size_t>{t.rows(), t.cols()};
    d.values.assign(t.value().begin(), t.value().end());
    out.emplace(name, std::move(d));
  }
  return out;
}

Encoder Encoder::clone() const { return Encoder(spec_, export_tensors()); }

}  // namespace stancy::encoder
