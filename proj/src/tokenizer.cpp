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

#include "stancy/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "stancy/errors.hpp"
#include "stancy/text.hpp"

namespace stancy::encoder {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
  pad_ = find(kPadToken);
  unk_ = find(kUnkToken);
  cls_ = find(kClsToken);
  sep_ = find(kSepToken);
  if (unk_ < 0 || cls_ < 0 || sep_ < 0) throw InputError("vocabulary lacks [UNK], [CLS] or [SEP]");
  if (pad_ < 0) pad_ = unk_;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

int Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

Tokenizer::Tokenizer(Vocabulary vocab, TokenizerKind kind, bool lowercase)
    : vocab_(std::move(vocab)), kind_(kind), lowercase_(lowercase) {}

std::vector<std::string> Tokenizer::basic_tokenize(std::string_view input) const {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char32_t cp : text::decode_utf8(input)) {
    if (cp == 0 || cp == 0xFFFD || text::is_control(cp)) continue;
    if (text::is_whitespace(cp)) {
      flush();
      continue;
    }
    if (lowercase_) {
      if (text::is_combining_mark(cp)) continue;
      cp = text::strip_accent(text::to_lower(cp));
    }
    if (text::is_punctuation(cp) || text::is_cjk(cp)) {
      flush();
      text::append_utf8(current, cp);
      flush();
      continue;
    }
    text::append_utf8(current, cp);
  }
  flush();
  return out;
}

void Tokenizer::wordpiece(const std::string& word, std::vector<std::string>& out) const {
  constexpr std::size_t kMaxChars = 100;
  const auto cps = text::decode_utf8(word);
  if (cps.size() > kMaxChars) {
    out.emplace_back(kUnkToken);
    return;
  }
  std::vector<std::string> sub;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    std::string found;
    while (start < end) {
      std::string cand = text::encode_utf8(std::vector<char32_t>(cps.begin() + static_cast<long>(start),
                                                                 cps.begin() + static_cast<long>(end)));
      if (start > 0) cand = "##" + cand;
      if (vocab_.find(cand) >= 0) {
        found = std::move(cand);
        break;
      }
      --end;
    }
    if (found.empty()) {
      out.emplace_back(kUnkToken);
      return;
    }
    sub.push_back(std::move(found));
    start = end;
  }
  out.insert(out.end(), sub.begin(), sub.end());
}

std::vector<std::string> Tokenizer::pieces(std::string_view text) const {
  auto words = basic_tokenize(text);
  std::vector<std::string> out;
  if (kind_ == TokenizerKind::kWordLevel) {
    for (auto& w : words) out.push_back(vocab_.find(w) >= 0 ? std::move(w) : std::string(kUnkToken));
    return out;
  }
  for (const auto& w : words) wordpiece(w, out);
  return out;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& p : pieces(text)) {
    const int id = vocab_.find(p);
    ids.push_back(id >= 0 ? id : vocab_.unk_id());
  }
  return ids;
}

Vocabulary build_word_vocabulary(const std::vector<std::string>& texts, bool lowercase, std::size_t min_count) {
  Tokenizer basic(Vocabulary({std::string(kPadToken), std::string(kUnkToken), std::string(kClsToken),
                              std::string(kSepToken)}),
                  TokenizerKind::kWordLevel, lowercase);
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& w : basic.basic_tokenize(t)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{std::string(kPadToken), std::string(kUnkToken), std::string(kClsToken),
                                  std::string(kSepToken)};
  for (auto& [w, c] : words) {
    if (c >= min_count && w != kPadToken && w != kUnkToken && w != kClsToken && w != kSepToken) tokens.push_back(w);
  }
  return Vocabulary(std::move(tokens));
}

}  // namespace stancy::encoder
