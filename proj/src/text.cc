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

#include "feedbias/text.h"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "feedbias/common.h"

namespace feedbias {

std::vector<WordSpan> WordSpans(std::string_view text) {
  std::vector<WordSpan> spans;
  size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const size_t begin = i;
    while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i]))) ++i;
    spans.push_back({begin, i});
  }
  return spans;
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string AsciiUpper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

CaseClass ClassifyCase(std::string_view token) {
  int letters = 0, upper = 0;
  bool first_upper = false, first_seen = false, rest_lower = true;
  for (unsigned char c : token) {
    if (!IsAsciiAlpha(c)) continue;
    const bool is_upper = c >= 'A' && c <= 'Z';
    ++letters;
    if (is_upper) ++upper;
    if (!first_seen) {
      first_seen = true;
      first_upper = is_upper;
    } else if (is_upper) {
      rest_lower = false;
    }
  }
  if (letters == 0 || upper == 0) return CaseClass::kLower;
  if (first_upper && rest_lower) {
    // A single uppercase letter counts as Capitalized.
    return CaseClass::kCapitalized;
  }
  if (upper == letters) return CaseClass::kAllCaps;
  return CaseClass::kMixed;
}

std::string ApplyCase(std::string_view form, CaseClass case_class) {
  switch (case_class) {
    case CaseClass::kLower:
      return AsciiLower(form);
    case CaseClass::kAllCaps:
      return AsciiUpper(form);
    case CaseClass::kCapitalized: {
      std::string out = AsciiLower(form);
      for (char& c : out) {
        if (IsAsciiAlpha(static_cast<unsigned char>(c))) {
          if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
          break;
        }
      }
      return out;
    }
    case CaseClass::kMixed:
      break;
  }
  return std::string(form);
}

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(),
                 nullptr) != 1) {
    Fail(ErrorKind::kInternal, "SHA-256 failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex.append(buf, 2);
  }
  return hex;
}

uint64_t Fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x100000001b3ULL);
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace feedbias
