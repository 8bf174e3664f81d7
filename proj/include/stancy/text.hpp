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

#include <string>
#include <string_view>
#include <vector>

namespace stancy::text {

// Collapses every run of whitespace to one ASCII space and strips both ends.
std::string normalize_whitespace(std::string_view s);
bool is_normalized(std::string_view s);

// Invalid sequences decode to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);
bool is_control(char32_t cp);
bool is_cjk(char32_t cp);
bool is_combining_mark(char32_t cp);
char32_t to_lower(char32_t cp);
// Base letter for precomposed Latin letters with diacritics; identity otherwise.
char32_t strip_accent(char32_t cp);

}  // namespace stancy::text
