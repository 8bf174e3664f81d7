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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "stancy/data.hpp"
#include "stancy/encoder.hpp"
#include "stancy/random.hpp"
#include "stancy/tokenizer.hpp"

namespace stancy::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("stancy-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> w = {"the",  "policy", "would", "make",   "people", "city",
                                             "school", "tax",  "plan",  "new",    "public", "money",
                                             "local", "state", "health", "rules", "time",   "year"};
  return w;
}

// A keyword ("good" or "bad") placed at a random position decides the label.
inline std::vector<data::StancePair> separable_pairs(std::size_t n, std::uint64_t seed,
                                                     data::Split split = data::Split::kTrain,
                                                     const std::string& id_prefix = "s") {
  Rng rng(seed);
  const auto& words = filler_words();
  std::vector<data::StancePair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool support = i % 2 == 0;
    std::vector<std::string> p;
    for (int k = 0; k < 5; ++k) p.push_back(words[rng.below(words.size())]);
    p.insert(p.begin() + static_cast<long>(rng.below(p.size() + 1)), support ? "good" : "bad");
    std::string perspective;
    for (const auto& w : p) perspective += (perspective.empty() ? "" : " ") + w;
    data::StancePair pair;
    pair.pair_id = id_prefix + std::to_string(i);
    pair.claim_text = "the plan is " + words[rng.below(words.size())];
    pair.perspective_text = perspective;
    pair.label = support ? data::StanceLabel::kSupport : data::StanceLabel::kOppose;
    pair.split = split;
    out.push_back(std::move(pair));
  }
  return out;
}

inline std::shared_ptr<const encoder::Tokenizer> toy_tokenizer(const std::vector<data::StancePair>& pairs) {
  std::vector<std::string> texts;
  for (const auto& p : pairs) {
    texts.push_back(p.claim_text);
    texts.push_back(p.perspective_text);
  }
  for (const auto& w : filler_words()) texts.push_back(w);
  texts.push_back("good bad a b c");
  return std::make_shared<encoder::Tokenizer>(encoder::build_word_vocabulary(texts, true),
                                              encoder::TokenizerKind::kWordLevel, true);
}

// 2 layers, H = 32, 2 heads over a word-level vocabulary.
inline encoder::EncoderSpec toy_spec(std::shared_ptr<const encoder::Tokenizer> tok, int max_len = 64) {
  encoder::EncoderSpec s;
  s.name = "toy";
  s.layers = 2;
  s.hidden_size = 32;
  s.attention_heads = 2;
  s.intermediate_size = 64;
  s.max_sequence_length = max_len;
  s.max_position_embeddings = max_len;
  s.tokenizer = std::move(tok);
  return s;
}

inline encoder::Encoder toy_encoder(std::uint64_t seed = 7, double init = 0.02) {
  auto spec = toy_spec(toy_tokenizer(separable_pairs(40, 1)));
  spec.initializer_range = init;
  return encoder::Encoder(std::move(spec), seed);
}

// Writes the three released Perspectrum files for a small synthetic corpus.
struct RawFixture {
  nlohmann::json claims = nlohmann::json::array();
  nlohmann::json pool = nlohmann::json::array();
  nlohmann::json splits = nlohmann::json::object();

  void write(const std::filesystem::path& dir) const {
    std::ofstream(dir / "perspectrum_with_answers_v1.0.json") << claims.dump();
    std::ofstream(dir / "perspective_pool_v1.0.json") << pool.dump();
    std::ofstream(dir / "dataset_split_v1.0.json") << splits.dump();
  }
};

inline RawFixture small_raw_fixture() {
  RawFixture f;
  f.pool = nlohmann::json::array({
      {{"pId", 10}, {"text", "Cameras  deter crime."}, {"source", "x"}},
      {{"pId", 11}, {"text", "Privacy will go away."}, {"source", "x"}},
      {{"pId", 12}, {"text", "It is mostly harmless."}, {"source", "x"}},
      {{"pId", 20}, {"text", "Taxes fund schools."}, {"source", "x"}},
      {{"pId", 21}, {"text", "Unsure either way."}, {"source", "x"}},
  });
  f.claims = nlohmann::json::array({
      {{"cId", 1},
       {"text", "Surveillance is good."},
       {"perspectives",
        {{{"pids", {10, 12}}, {"stance_label_3", "SUPPORT"}, {"stance_label_5", "MILDLY_SUPPORT"}},
         {{"pids", {11}}, {"stance_label_3", "UNDERMINE"}, {"stance_label_5", "UNDERMINE"}}}}},
      {{"cId", 2},
       {"text", "Raise taxes."},
       {"perspectives",
        {{{"pids", {20}}, {"stance_label_3", "SUPPORT"}},
         {{"pids", {21}}, {"stance_label_3", "NOT_ENOUGH_INFO"}}}}},
  });
  f.splits = {{"1", "train"}, {"2", "test"}};
  return f;
}

}  // namespace stancy::testing
