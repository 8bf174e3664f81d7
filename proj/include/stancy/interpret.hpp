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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "stancy/data.hpp"
#include "stancy/model.hpp"

// Incremental phrase attribution: the perspective is fed to the classifier one
// phrase longer at a time and each phrase is scored by the shift it causes in
// the SUPPORT probability.
namespace stancy::interpret {

struct TextSpan {
  std::size_t begin = 0;  // byte offsets into the perspective
  std::size_t end = 0;
  bool operator==(const TextSpan&) const = default;
};

enum class SegmenterMode { kUnigram, kShallowChunk };

struct PhraseSegmentation {
  std::string text;
  std::vector<TextSpan> spans;
  SegmenterMode segmenter = SegmenterMode::kUnigram;

  std::size_t size() const { return spans.size(); }
  std::string phrase(std::size_t i) const { return text.substr(spans[i].begin, spans[i].end - spans[i].begin); }
  // Text of the first `i` phrases with their original separators (P_i); P_0 is empty.
  std::string prefix(std::size_t i) const;
  // Phrases joined with the original gaps, including leading/trailing ones.
  std::string reconstruct() const;
};

// Source of shallow-parser chunks. Returns nullopt when it has no chunking for
// `text`.
class Chunker {
 public:
  virtual ~Chunker() = default;
  virtual std::optional<std::vector<std::string>> chunk(std::string_view text) const = 0;
};

// Chunks produced offline by an external shallow parser, one JSON object per
// line: {"text": "...", "chunks": ["...", ...]}.
class ChunkFile : public Chunker {
 public:
  static std::shared_ptr<ChunkFile> load(const std::filesystem::path& path);
  explicit ChunkFile(std::unordered_map<std::string, std::vector<std::string>> entries);
  std::optional<std::vector<std::string>> chunk(std::string_view text) const override;

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Locates `chunks` in order inside `text`, allowing only whitespace between
// them. nullopt if they do not tile the non-whitespace content.
std::optional<std::vector<TextSpan>> align_chunks(std::string_view text, const std::vector<std::string>& chunks);

// UNIGRAM: maximal runs of non-whitespace. SHALLOW_CHUNK: spans from
// `chunker`, falling back to UNIGRAM when no chunker is given or it cannot
// segment this text. Throws InputError on empty text.
PhraseSegmentation segment(std::string_view perspective, SegmenterMode mode, const Chunker* chunker = nullptr);

struct PhraseAttribution {
  std::string pair_id;
  std::string phrase;
  std::size_t index = 0;  // 1-based
  double delta = 0.0;     // |p_support(C, P_i) - p_support(C, P_{i-1})|
  double signed_delta = 0.0;
  data::StanceLabel direction = data::StanceLabel::kSupport;  // class whose probability rose
  double p_support_before = 0.0;
  double p_support_after = 0.0;
};

// Requires a CONS model (ContractError otherwise). Returns one attribution per phrase.
std::vector<PhraseAttribution> attribute(const model::StancyModel& model, const data::StancePair& pair,
                                         const PhraseSegmentation& seg);

// Attribution over many pairs, parallel across pairs, returned sorted by pair_id.
std::vector<std::vector<PhraseAttribution>> attribute_corpus(const model::StancyModel& model,
                                                             std::span<const data::StancePair> pairs,
                                                             SegmenterMode mode, const Chunker* chunker = nullptr,
                                                             unsigned threads = 0);

struct RankedPhrase {
  std::string phrase;
  double score = 0.0;  // mean delta
  std::size_t occurrences = 0;
};

struct PhraseRanking {
  std::vector<RankedPhrase> support;
  std::vector<RankedPhrase> oppose;

  std::string format_table() const;
  nlohmann::ordered_json to_json() const;
};

// Lowercased with surrounding punctuation removed; empty for pure punctuation.
std::string phrase_key(std::string_view phrase);

// Groups by (direction, phrase_key), scores by mean delta, keeps phrases seen
// at least `min_count` times, and returns the `top_k` highest per class
// (ties alphabetical).
PhraseRanking rank_phrases(std::span<const PhraseAttribution> attributions, std::size_t top_k,
                           std::size_t min_count = 2);

nlohmann::ordered_json to_json(const PhraseAttribution& a);

}  // namespace stancy::interpret
