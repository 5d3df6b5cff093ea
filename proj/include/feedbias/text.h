//
// Copyright 2026 The feedbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEEDBIAS_TEXT_H_
#define FEEDBIAS_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace feedbias {

// A word token as a byte span of its source text.
struct WordSpan {
  size_t begin = 0;
  size_t end = 0;  // exclusive
  std::string_view View(std::string_view text) const {
    return text.substr(begin, end - begin);
  }
};

// Word bytes are ASCII letters/digits and any byte of a non-ASCII UTF-8
// sequence; everything else (whitespace, ASCII punctuation) separates words.
inline bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

inline bool IsAsciiAlpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool IsSpaceByte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Splits on whitespace and punctuation. Apostrophes split words.
std::vector<WordSpan> WordSpans(std::string_view text);

std::string AsciiLower(std::string_view s);
std::string AsciiUpper(std::string_view s);

enum class CaseClass { kLower, kCapitalized, kAllCaps, kMixed };

// Classifies by ASCII letters only; tokens without letters are kLower.
CaseClass ClassifyCase(std::string_view token);

// Applies `case_class` to `form`. kMixed returns `form` unchanged.
std::string ApplyCase(std::string_view form, CaseClass case_class);

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// 64-bit FNV-1a with an explicit seed folded into the offset basis.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0);

}  // namespace feedbias

#endif  // FEEDBIAS_TEXT_H_
