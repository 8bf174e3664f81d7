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

#include "stancy/checkpoint.hpp"

#include <atomic>

#include "stancy/errors.hpp"
#include "stancy/io.hpp"
#include "stancy/safetensors.hpp"

namespace stancy::checkpoint {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "stancy-checkpoint/1";

fs::path staging_dir(const fs::path& dir) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = dir;
  tmp += ".tmp-" + std::to_string(counter.fetch_add(1));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  return tmp;
}

void publish(const fs::path& tmp, const fs::path& dir) {
  fs::remove_all(dir);
  if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
  fs::rename(tmp, dir);
}

}  // namespace

void save(const fs::path& dir, const model::StancyModel& model, const config::ExperimentConfig& cfg) {
  const fs::path tmp = staging_dir(dir);
  nlohmann::ordered_json meta;
  meta["format"] = kFormat;
  meta["variant"] = model.variant_tag();
  meta["encoder"] = model.encoder().spec().to_json();
  meta["head_shape"] = {model.head().weight.rows(), model.head().weight.cols()};
  meta["cos_weight"] = model.options().cos_weight;
  meta["detach_cos_feature"] = model.options().detach_cos_feature;
  io::write_file_atomic(tmp / "meta.json", meta.dump(2) + "\n");
  cfg.save(tmp / "config.json");
  model.encoder().spec().tokenizer->vocab().save(tmp / "vocab.txt");
  safetensors::save(tmp / "encoder.safetensors", model.encoder().export_tensors());
  const auto& w = model.head().weight;
  safetensors::TensorMap head;
  head.emplace("head.weight", safetensors::TensorData{{w.rows(), w.cols()}, {w.value().begin(), w.value().end()}});
  safetensors::save(tmp / "head.safetensors", head);
  publish(tmp, dir);
}

void save(const fs::path& dir, const lstm::LstmClassifier& model, const config::ExperimentConfig& cfg) {
  const fs::path tmp = staging_dir(dir);
  nlohmann::ordered_json meta;
  meta["format"] = kFormat;
  meta["variant"] = model.variant_tag();
  meta["lstm"] = {{"embedding_dim", model.spec().embedding_dim},
                  {"hidden_size", model.spec().hidden_size},
                  {"dense_size", model.spec().dense_size}};
  io::write_file_atomic(tmp / "meta.json", meta.dump(2) + "\n");
  cfg.save(tmp / "config.json");
  safetensors::save(tmp / "lstm.safetensors", model.export_tensors());
  publish(tmp, dir);
}

void save(const fs::path& dir, const model::Classifier& model, const config::ExperimentConfig& cfg) {
  if (const auto* m = dynamic_cast<const model::StancyModel*>(&model)) return save(dir, *m, cfg);
  if (const auto* m = dynamic_cast<const lstm::LstmClassifier*>(&model)) return save(dir, *m, cfg);
  throw ContractError("checkpoint::save: unsupported classifier type");
}

Loaded load(const fs::path& dir, const std::unordered_set<std::string>* lstm_vocabulary) {
  if (!fs::is_directory(dir)) throw CheckpointError("checkpoint directory not found: " + dir.string());
  try {
    const auto meta = nlohmann::json::parse(io::read_file(dir / "meta.json"));
    if (meta.value("format", std::string()) != kFormat) throw CheckpointError("unrecognized checkpoint format");
    Loaded out;
    out.config = config::ExperimentConfig::load(dir / "config.json");
    out.variant = meta.at("variant").get<std::string>();
    if (out.variant == "LSTM_BASELINE") {
      const auto& m = meta.at("lstm");
      lstm::LstmSpec spec{m.at("embedding_dim").get<int>(), m.at("hidden_size").get<int>(),
                          m.at("dense_size").get<int>()};
      auto table = lstm::WordEmbeddings::load(out.config.lstm_embeddings_path, spec.embedding_dim, lstm_vocabulary);
      out.classifier = std::make_shared<lstm::LstmClassifier>(table, spec, safetensors::load(dir / "lstm.safetensors"));
      return out;
    }
    const auto variant = model::parse_variant(out.variant);
    const auto& ej = meta.at("encoder");
    const auto kind = ej.value("tokenizer", std::string("word")) == "wordpiece" ? encoder::TokenizerKind::kWordPiece
                                                                               : encoder::TokenizerKind::kWordLevel;
    auto tokenizer = std::make_shared<encoder::Tokenizer>(encoder::Vocabulary::load(dir / "vocab.txt"), kind,
                                                          ej.value("lowercase", true));
    auto spec = encoder::EncoderSpec::from_json(ej, tokenizer);
    encoder::Encoder enc(spec, safetensors::load(dir / "encoder.safetensors"));
    const auto head_tensors = safetensors::load(dir / "head.safetensors");
    auto it = head_tensors.find("head.weight");
    if (it == head_tensors.end()) throw CheckpointError("head.safetensors lacks head.weight");
    const auto shape = meta.at("head_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || it->second.values.size() != shape[0] * shape[1]) {
      throw CheckpointError("head weight shape mismatch");
    }
    model::ClassifierHead head{ag::Tensor::parameter(shape[0], shape[1], it->second.values)};
    model::ModelOptions options;
    options.cos_weight = meta.value("cos_weight", 1.0);
    options.detach_cos_feature = meta.value("detach_cos_feature", false);
    out.classifier = std::make_shared<model::StancyModel>(variant, std::move(enc), std::move(head), options);
    return out;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("cannot load checkpoint " + dir.string() + ": " + e.what());
  }
}

}  // namespace stancy::checkpoint
