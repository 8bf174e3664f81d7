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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "stancy/errors.hpp"
#include "stancy/text.hpp"
#include "stancy/tokenizer.hpp"
#include "support/fixtures.hpp"

namespace stancy {
namespace {

using encoder::TokenizerKind;
using encoder::Tokenizer;
using encoder::Vocabulary;

TEST(Text, NormalizeWhitespaceCollapsesAndTrims) {
  EXPECT_EQ(text::normalize_whitespace("  a \t\n b  c "), "a b c");
  EXPECT_EQ(text::normalize_whitespace(""), "");
  EXPECT_EQ(text::normalize_whitespace(" \n\t "), "");
  EXPECT_TRUE(text::is_normalized("a b"));
  EXPECT_FALSE(text::is_normalized("a  b"));
  EXPECT_FALSE(text::is_normalized(" a"));
}

TEST(Text, NormalizationIsIdempotent) {
  for (const std::string s : {"x", "  a  b\t", "\n\nq  r s\n", "caf\xC3\xA9  ok"}) {
    const auto once = text::normalize_whitespace(s);
    EXPECT_EQ(text::normalize_whitespace(once), once);
    EXPECT_TRUE(text::is_normalized(once));
  }
}

TEST(Text, Utf8RoundTrip) {
  const std::string s = "na\xC3\xAFve \xE2\x82\xAC \xF0\x9F\x98\x80";
  EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
  EXPECT_EQ(text::decode_utf8("\xC3\xA9").front(), U'é');
}

TEST(Text, InvalidUtf8BecomesReplacementCharacter) {
  const auto cps = text::decode_utf8("a\xFF" "b");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'�');
}

TEST(Text, CharacterClasses) {
  EXPECT_TRUE(text::is_punctuation(U','));
  EXPECT_TRUE(text::is_punctuation(U'$'));
  EXPECT_FALSE(text::is_punctuation(U'a'));
  EXPECT_TRUE(text::is_whitespace(U'\t'));
  EXPECT_TRUE(text::is_cjk(U'中'));
  EXPECT_EQ(text::to_lower(U'É'), U'é');
  EXPECT_EQ(text::strip_accent(U'é'), U'e');
}

Vocabulary small_vocab() {
  return Vocabulary({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "the", "un", "##aff", "##able", "run", "##ning", ",", "!",
                     "cafe"});
}

TEST(Tokenizer, VocabularyRequiresControlTokens) {
  EXPECT_THROW(Vocabulary({"[PAD]", "a"}), InputError);
  const auto v = small_vocab();
  EXPECT_EQ(v.cls_id(), 2);
  EXPECT_EQ(v.sep_id(), 3);
  EXPECT_EQ(v.find("run"), 8);
  EXPECT_EQ(v.find("zzz"), -1);
}

TEST(Tokenizer, BasicTokenizeSplitsPunctuationAndLowercases) {
  Tokenizer t(small_vocab(), TokenizerKind::kWordPiece, true);
  EXPECT_EQ(t.basic_tokenize("The  unaffable, RUNNING!"),
            (std::vector<std::string>{"the", "unaffable", ",", "running", "!"}));
  EXPECT_EQ(t.basic_tokenize("Caf\xC3\xA9"), (std::vector<std::string>{"cafe"}));
}

TEST(Tokenizer, WordPieceGreedyLongestMatch) {
  Tokenizer t(small_vocab(), TokenizerKind::kWordPiece, true);
  EXPECT_EQ(t.pieces("unaffable running"), (std::vector<std::string>{"un", "##aff", "##able", "run", "##ning"}));
  EXPECT_EQ(t.pieces("xyz"), (std::vector<std::string>{"[UNK]"}));
  EXPECT_EQ(t.encode("the run"), (std::vector<int>{4, 8}));
}

TEST(Tokenizer, WordLevelMapsWholeWords) {
  Tokenizer t(small_vocab(), TokenizerKind::kWordLevel, true);
  EXPECT_EQ(t.pieces("the running"), (std::vector<std::string>{"the", "[UNK]"}));
}

TEST(Tokenizer, BuildWordVocabularyOrder) {
  const auto v = encoder::build_word_vocabulary({"b a b", "c b a"}, true);
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v.token(0), "[PAD]");
  EXPECT_EQ(v.token(4), "b");
  EXPECT_EQ(v.token(5), "a");
  EXPECT_EQ(v.token(6), "c");
  const auto pruned = encoder::build_word_vocabulary({"b a b", "c b a"}, true, 2);
  EXPECT_EQ(pruned.size(), 6u);
}

TEST(Tokenizer, VocabularySaveLoadRoundTrip) {
  testing::TempDir dir("vocab");
  const auto v = small_vocab();
  v.save(dir / "vocab.txt");
  EXPECT_EQ(Vocabulary::load(dir / "vocab.txt"), v);
}

}  // namespace
}  // namespace stancy
