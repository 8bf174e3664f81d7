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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stancy::encoder {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";

class Vocabulary {
 public:
  Vocabulary() = default;
  // Tokens in id order; must contain the four control tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  // One token per line, id = line index (the BERT vocab.txt layout).
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  // -1 when absent.
  int find(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int pad_id() const { return pad_; }
  int unk_id() const { return unk_; }
  int cls_id() const { return cls_; }
  int sep_id() const { return sep_; }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int pad_ = -1, unk_ = -1, cls_ = -1, sep_ = -1;
};

enum class TokenizerKind { kWordPiece, kWordLevel };

class Tokenizer {
 public:
  Tokenizer(Vocabulary vocab, TokenizerKind kind, bool lowercase = true);

  // Whitespace/punctuation split with optional lowercasing and accent stripping.
  std::vector<std::string> basic_tokenize(std::string_view text) const;
  // Subword (WordPiece) or whole-word pieces.
  std::vector<std::string> pieces(std::string_view text) const;
  std::vector<int> encode(std::string_view text) const;

  const Vocabulary& vocab() const { return vocab_; }
  TokenizerKind kind() const { return kind_; }
  bool lowercase() const { return lowercase_; }

 private:
  void wordpiece(const std::string& word, std::vector<std::string>& out) const;

  Vocabulary vocab_;
  TokenizerKind kind_;
  bool lowercase_;
};

// Word-level vocabulary over `texts`: control tokens first, then words with
// count >= min_count ordered by descending count, ties lexicographic.
Vocabulary build_word_vocabulary(const std::vector<std::string>& texts, bool lowercase, std::size_t min_count = 1);

}  // namespace stancy::encoder
