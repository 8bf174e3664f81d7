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

#include "stancy/interpret.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "stancy/errors.hpp"
#include "stancy/text.hpp"

namespace stancy::interpret {

namespace {

bool is_space_byte(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<TextSpan> unigram_spans(std::string_view t) {
  std::vector<TextSpan> spans;
  std::size_t i = 0;
  while (i < t.size()) {
    while (i < t.size() && is_space_byte(t[i])) ++i;
    if (i >= t.size()) break;
    const std::size_t b = i;
    while (i < t.size() && !is_space_byte(t[i])) ++i;
    spans.push_back({b, i});
  }
  return spans;
}

}  // namespace

std::string PhraseSegmentation::prefix(std::size_t i) const {
  if (i == 0) return {};
  return text.substr(0, spans.at(i - 1).end);
}

std::string PhraseSegmentation::reconstruct() const {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    out.append(text, cursor, s.begin - cursor);
    out.append(text, s.begin, s.end - s.begin);
    cursor = s.end;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

ChunkFile::ChunkFile(std::unordered_map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {}

std::shared_ptr<ChunkFile> ChunkFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open chunk file " + path.string());
  std::unordered_map<std::string, std::vector<std::string>> entries;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries[j.at("text").get<std::string>()] = j.at("chunks").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return std::make_shared<ChunkFile>(std::move(entries));
}

std::optional<std::vector<std::string>> ChunkFile::chunk(std::string_view text) const {
  auto it = entries_.find(std::string(text));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<TextSpan>> align_chunks(std::string_view text, const std::vector<std::string>& chunks) {
  std::vector<TextSpan> spans;
  std::size_t cursor = 0;
  for (const auto& c : chunks) {
    if (c.empty()) return std::nullopt;
    while (cursor < text.size() && is_space_byte(text[cursor])) ++cursor;
    if (text.compare(cursor, c.size(), c) != 0) return std::nullopt;
    spans.push_back({cursor, cursor + c.size()});
    cursor += c.size();
  }
  while (cursor < text.size() && is_space_byte(text[cursor])) ++cursor;
  if (cursor != text.size() || spans.empty()) return std::nullopt;
  return spans;
}

PhraseSegmentation segment(std::string_view perspective, SegmenterMode mode, const Chunker* chunker) {
  if (perspective.empty()) throw InputError("segment: empty perspective");
  PhraseSegmentation seg;
  seg.text = std::string(perspective);
  if (mode == SegmenterMode::kShallowChunk && chunker) {
    if (auto chunks = chunker->chunk(perspective)) {
      if (auto spans = align_chunks(perspective, *chunks)) {
        seg.spans = std::move(*spans);
        seg.segmenter = SegmenterMode::kShallowChunk;
        return seg;
      }
    }
  }
  seg.spans = unigram_spans(perspective);
  seg.segmenter = SegmenterMode::kUnigram;
  return seg;
}

std::vector<PhraseAttribution> attribute(const model::StancyModel& model, const data::StancePair& pair,
                                         const PhraseSegmentation& seg) {
  if (model.variant() != model::Variant::kCons) throw ContractError("attribute requires a CONS model");
  std::vector<PhraseAttribution> out;
  out.reserve(seg.size());
  double previous = model.predict(pair.claim_text, seg.prefix(0)).p_support();
  for (std::size_t i = 1; i <= seg.size(); ++i) {
    const double current = model.predict(pair.claim_text, seg.prefix(i)).p_support();
    PhraseAttribution a;
    a.pair_id = pair.pair_id;
    a.phrase = seg.phrase(i - 1);
    a.index = i;
    a.signed_delta = current - previous;
    a.delta = std::fabs(a.signed_delta);
    a.direction = a.signed_delta < 0.0 ? data::StanceLabel::kOppose : data::StanceLabel::kSupport;
    a.p_support_before = previous;
    a.p_support_after = current;
    out.push_back(std::move(a));
    previous = current;
  }
  return out;
}

std::vector<std::vector<PhraseAttribution>> attribute_corpus(const model::StancyModel& model,
                                                             std::span<const data::StancePair> pairs,
                                                             SegmenterMode mode, const Chunker* chunker,
                                                             unsigned threads) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs[a].pair_id < pairs[b].pair_id; });
  std::vector<std::vector<PhraseAttribution>> out(pairs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < order.size(); k += stride) {
      const auto& p = pairs[order[k]];
      out[k] = attribute(model, p, segment(p.perspective_text, mode, chunker));
    }
  };
  if (threads <= 1 || pairs.size() < 2) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        work(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string phrase_key(std::string_view phrase) {
  auto cps = text::decode_utf8(phrase);
  std::size_t b = 0, e = cps.size();
  while (b < e && text::is_punctuation(cps[b])) ++b;
  while (e > b && text::is_punctuation(cps[e - 1])) --e;
  std::vector<char32_t> core(cps.begin() + static_cast<long>(b), cps.begin() + static_cast<long>(e));
  for (auto& cp : core) cp = text::to_lower(cp);
  return text::normalize_whitespace(text::encode_utf8(core));
}

PhraseRanking rank_phrases(std::span<const PhraseAttribution> attributions, std::size_t top_k, std::size_t min_count) {
  struct Acc {
    double total = 0.0;
    std::size_t n = 0;
  };
  std::array<std::map<std::string, Acc>, data::kNumLabels> groups;
  for (const auto& a : attributions) {
    const std::string key = phrase_key(a.phrase);
    if (key.empty()) continue;
    auto& acc = groups[data::label_index(a.direction)][key];
    acc.total += a.delta;
    ++acc.n;
  }
  auto build = [&](const std::map<std::string, Acc>& g) {
    std::vector<RankedPhrase> list;
    for (const auto& [phrase, acc] : g) {
      if (acc.n < min_count) continue;
      list.push_back({phrase, acc.total / static_cast<double>(acc.n), acc.n});
    }
    std::stable_sort(list.begin(), list.end(), [](const RankedPhrase& x, const RankedPhrase& y) { return x.score > y.score; });
    if (list.size() > top_k) list.resize(top_k);
    return list;
  };
  PhraseRanking r;
  r.support = build(groups[data::label_index(data::StanceLabel::kSupport)]);
  r.oppose = build(groups[data::label_index(data::StanceLabel::kOppose)]);
  return r;
}

std::string PhraseRanking::format_table() const {
  std::string out = fmt::format("{:<4}{:<32}{:>10}{:>6}   {:<32}{:>10}{:>6}\n", "#", "Opposing", "score", "n",
                                "Supporting", "score", "n");
  const std::size_t rows = std::max(support.size(), oppose.size());
  for (std::size_t i = 0; i < rows; ++i) {
    std::string left = i < oppose.size() ? fmt::format("{:<32}{:>10.4f}{:>6}", oppose[i].phrase, oppose[i].score,
                                                       oppose[i].occurrences)
                                         : std::string(48, ' ');
    std::string right = i < support.size() ? fmt::format("{:<32}{:>10.4f}{:>6}", support[i].phrase, support[i].score,
                                                         support[i].occurrences)
                                           : std::string();
    out += fmt::format("{:<4}{}   {}\n", i + 1, left, right);
  }
  return out;
}

nlohmann::ordered_json PhraseRanking::to_json() const {
  nlohmann::ordered_json j;
  auto list = [](const std::vector<RankedPhrase>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : v) arr.push_back({{"phrase", p.phrase}, {"score", p.score}, {"occurrences", p.occurrences}});
    return arr;
  };
  j["SUPPORT"] = list(support);
  j["OPPOSE"] = list(oppose);
  return j;
}

nlohmann::ordered_json to_json(const PhraseAttribution& a) {
  nlohmann::ordered_json j;
  j["pair_id"] = a.pair_id;
  j["index"] = a.index;
  j["phrase"] = a.phrase;
  j["delta"] = a.delta;
  j["signed_delta"] = a.signed_delta;
  j["direction"] = data::label_name(a.direction);
  j["p_support_before"] = a.p_support_before;
  j["p_support_after"] = a.p_support_after;
  return j;
}

}  // namespace stancy::interpret
