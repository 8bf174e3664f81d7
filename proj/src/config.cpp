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

#include "stancy/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>

#include "stancy/errors.hpp"
#include "stancy/io.hpp"

namespace stancy::config {
namespace {

using nlohmann::json;
using Cfg = ExperimentConfig;

struct Key {
  const char* name;
  std::function<json(const Cfg&)> get;
  std::function<void(Cfg&, const json&)> set;
};

template <class T>
Key field(const char* name, T Cfg::*member) {
  return {name, [member](const Cfg& c) { return json(c.*member); },
          [member](Cfg& c, const json& v) { c.*member = v.get<T>(); }};
}

Key ingest_field(const char* name, std::string data::IngestOptions::*member) {
  return {name, [member](const Cfg& c) { return json(c.ingest.*member); },
          [member](Cfg& c, const json& v) { c.ingest.*member = v.get<std::string>(); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      field("seed", &Cfg::seed),
      field("variant", &Cfg::variant),
      field("encoder.name", &Cfg::encoder_name),
      field("encoder.path", &Cfg::encoder_path),
      field("encoder.layers", &Cfg::encoder_layers),
      field("encoder.hidden_size", &Cfg::encoder_hidden_size),
      field("encoder.attention_heads", &Cfg::encoder_heads),
      field("encoder.intermediate_size", &Cfg::encoder_intermediate_size),
      field("encoder.max_sequence_length", &Cfg::encoder_max_sequence_length),
      field("encoder.lowercase", &Cfg::encoder_lowercase),
      field("encoder.vocab_min_count", &Cfg::encoder_vocab_min_count),
      field("encoder.initializer_range", &Cfg::encoder_initializer_range),
      field("train.learning_rate", &Cfg::learning_rate),
      field("train.batch_size", &Cfg::batch_size),
      field("train.epochs", &Cfg::epochs),
      field("train.grid.learning_rate", &Cfg::grid_learning_rates),
      field("train.grid.batch_size", &Cfg::grid_batch_sizes),
      field("train.warmup_fraction", &Cfg::warmup_fraction),
      field("train.clip_norm", &Cfg::clip_norm),
      field("adam.beta1", &Cfg::adam_beta1),
      field("adam.beta2", &Cfg::adam_beta2),
      field("adam.eps", &Cfg::adam_eps),
      field("adam.weight_decay", &Cfg::adam_weight_decay),
      field("loss.cos_weight", &Cfg::cos_weight),
      field("model.detach_cos_feature", &Cfg::detach_cos_feature),
      field("lstm.embeddings_path", &Cfg::lstm_embeddings_path),
      field("lstm.embedding_dim", &Cfg::lstm_embedding_dim),
      field("lstm.hidden_size", &Cfg::lstm_hidden_size),
      field("lstm.dense_size", &Cfg::lstm_dense_size),
      field("eval.split", &Cfg::eval_split),
      ingest_field("data.claims_file", &data::IngestOptions::claims_file),
      ingest_field("data.pool_file", &data::IngestOptions::pool_file),
      ingest_field("data.split_file", &data::IngestOptions::split_file),
      {"labels.field", [](const Cfg& c) { return json(c.ingest.collapse.field); },
       [](Cfg& c, const json& v) { c.ingest.collapse.field = v.get<std::string>(); }},
      field("interpret.mode", &Cfg::interpret_mode),
      field("interpret.top_k", &Cfg::interpret_top_k),
      field("interpret.min_count", &Cfg::interpret_min_count),
      field("interpret.chunk_file", &Cfg::interpret_chunk_file),
  };
  return k;
}

constexpr std::string_view kLabelMapPrefix = "labels.map.";

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::map<std::string, const Key*> by_name;
  for (const auto& k : keys()) by_name[k.name] = &k;
  bool label_map_seen = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& name = it.key();
    if (name.rfind(kLabelMapPrefix, 0) == 0) {
      if (!label_map_seen) {
        c.ingest.collapse.mapping.clear();
        label_map_seen = true;
      }
      const std::string raw = data::LabelCollapse::canonical_key(name.substr(kLabelMapPrefix.size()));
      if (!it.value().is_string()) {
        errors.push_back(name + ": expected SUPPORT, OPPOSE or DROP");
        continue;
      }
      const auto target = it.value().get<std::string>();
      if (target == "SUPPORT") {
        c.ingest.collapse.mapping[raw] = data::StanceLabel::kSupport;
      } else if (target == "OPPOSE") {
        c.ingest.collapse.mapping[raw] = data::StanceLabel::kOppose;
      } else if (target == "DROP") {
        c.ingest.collapse.mapping[raw] = std::nullopt;
      } else {
        errors.push_back(name + ": expected SUPPORT, OPPOSE or DROP, got " + target);
      }
      continue;
    }
    auto k = by_name.find(name);
    if (k == by_name.end()) {
      errors.push_back("unknown key '" + name + "'");
      continue;
    }
    try {
      k->second->set(c, it.value());
    } catch (const json::exception& e) {
      errors.push_back(name + ": wrong type (" + it.value().dump() + ")");
    }
  }
  for (auto& v : c.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  return from_json(j);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& k : keys()) j[k.name] = k.get(*this);
  for (const auto& [raw, target] : ingest.collapse.mapping) {
    j[std::string(kLabelMapPrefix) + raw] = target ? std::string(data::label_name(*target)) : std::string("DROP");
  }
  return j;
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, to_json().dump(2) + "\n");
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> v;
  if (variant != "base" && variant != "cons" && variant != "lstm") v.push_back("variant must be base, cons or lstm");
  if (encoder_name != "toy" && encoder_name != "bert") v.push_back("encoder.name must be toy or bert");
  if (encoder_layers < 1) v.push_back("encoder.layers must be >= 1");
  if (encoder_hidden_size < 1) v.push_back("encoder.hidden_size must be > 0");
  if (encoder_heads < 1 || (encoder_hidden_size > 0 && encoder_hidden_size % encoder_heads != 0)) {
    v.push_back("encoder.attention_heads must divide encoder.hidden_size");
  }
  if (encoder_intermediate_size < 1) v.push_back("encoder.intermediate_size must be > 0");
  if (encoder_max_sequence_length < 3) v.push_back("encoder.max_sequence_length must be >= 3");
  if (encoder_vocab_min_count < 1) v.push_back("encoder.vocab_min_count must be >= 1");
  if (!(encoder_initializer_range > 0.0)) v.push_back("encoder.initializer_range must be > 0");
  if (!(learning_rate > 0.0)) v.push_back("train.learning_rate must be > 0");
  if (batch_size < 1) v.push_back("train.batch_size must be >= 1");
  if (epochs < 1) v.push_back("train.epochs must be >= 1");
  for (double lr : grid_learning_rates) {
    if (!(lr > 0.0)) v.push_back("train.grid.learning_rate entries must be > 0");
  }
  for (int b : grid_batch_sizes) {
    if (b < 1) v.push_back("train.grid.batch_size entries must be >= 1");
  }
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) v.push_back("train.warmup_fraction must be in [0, 1)");
  if (clip_norm < 0.0) v.push_back("train.clip_norm must be >= 0 (0 disables)");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0) v.push_back("adam.beta1 must be in [0, 1)");
  if (adam_beta2 < 0.0 || adam_beta2 >= 1.0) v.push_back("adam.beta2 must be in [0, 1)");
  if (!(adam_eps > 0.0)) v.push_back("adam.eps must be > 0");
  if (adam_weight_decay < 0.0) v.push_back("adam.weight_decay must be >= 0");
  if (cos_weight < 0.0) v.push_back("loss.cos_weight must be >= 0");
  if (lstm_embedding_dim < 1) v.push_back("lstm.embedding_dim must be > 0");
  if (lstm_hidden_size < 1) v.push_back("lstm.hidden_size must be > 0");
  if (lstm_dense_size < 1) v.push_back("lstm.dense_size must be > 0");
  try {
    data::parse_split(eval_split);
  } catch (const InputError&) {
    v.push_back("eval.split must be train, dev or test");
  }
  if (interpret_mode != "unigram" && interpret_mode != "chunk") v.push_back("interpret.mode must be unigram or chunk");
  if (interpret_top_k < 0) v.push_back("interpret.top_k must be >= 0");
  if (interpret_min_count < 1) v.push_back("interpret.min_count must be >= 1");
  return v;
}

void ExperimentConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

std::string ExperimentConfig::resolved_encoder_path() const {
  if (!encoder_path.empty()) return encoder_path;
  if (const char* env = std::getenv("STANCY_ENCODER_DIR")) return env;
  return {};
}

}  // namespace stancy::config
