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

#ifndef FEEDBIAS_LEXICON_H_
#define FEEDBIAS_LEXICON_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "feedbias/common.h"
#include "feedbias/text.h"

namespace feedbias {

struct GenderPair {
  std::string male_form;
  std::string female_form;
};

// Context rule for a surface whose counterpart depends on syntax, e.g. "her"
// is possessive ("her hair" -> "his hair") or objective ("to her" -> "him").
// replacement_a applies when the next token (separated by whitespace only)
// starts with a letter; replacement_b otherwise.
struct AmbiguousRule {
  std::string surface;
  Direction direction = Direction::kF2M;
  std::string rule_id;
  std::string replacement_a;
  std::string replacement_b;
};

class GenderLexicon {
 public:
  GenderLexicon() = default;
  // Validates the invariants (unique forms, token shape, rule coverage).
  GenderLexicon(std::vector<GenderPair> pairs, std::vector<AmbiguousRule> rules);

  // Rules for "her" (F2M), "his" (M2F) and "hers" (F2M).
  static std::vector<AmbiguousRule> DefaultAmbiguousRules();

  const std::vector<GenderPair>& pairs() const { return pairs_; }
  const std::vector<AmbiguousRule>& ambiguous_rules() const { return rules_; }
  size_t size() const { return pairs_.size(); }

  // Lookups take lowercase keys. Return nullptr when absent.
  const std::string* Counterpart(std::string_view lower_form, Direction direction) const;
  const AmbiguousRule* Ambiguous(std::string_view lower_form, Direction direction) const;
  bool IsMaleForm(std::string_view lower_form) const;
  bool IsFemaleForm(std::string_view lower_form) const;
  // True when `lower_form` (ending in '.') is a title entry such as "mr.".
  bool IsPeriodForm(std::string_view lower_form) const;

 private:
  std::vector<GenderPair> pairs_;
  std::vector<AmbiguousRule> rules_;
  std::unordered_map<std::string, size_t> male_index_;
  std::unordered_map<std::string, size_t> female_index_;
  std::unordered_map<std::string, size_t> rule_index_[2];
};

// Parses `male<TAB>female` lines; '#' starts a comment line. Lines of the form
// `@ambiguous<TAB>surface<TAB>M2F|F2M<TAB>rule_id<TAB>a<TAB>b` declare
// ambiguity rules; when none are declared the defaults apply.
GenderLexicon ParseLexicon(std::string_view contents, const std::string& origin = "<memory>");
GenderLexicon LoadLexicon(const std::string& path);

enum class SubstitutionRule { kExact, kAmbiguousHeuristic };

std::string_view SubstitutionRuleName(SubstitutionRule rule);

struct Substitution {
  size_t position = 0;  // token index
  std::string original;
  std::string replacement;
  SubstitutionRule rule = SubstitutionRule::kExact;
};

struct SwapResult {
  std::string output_text;
  std::vector<Substitution> substitutions;
  size_t ambiguous_count = 0;
};

// Lexicon-aware tokenization: word spans, with a trailing '.' absorbed when the
// word plus period is a title entry of the lexicon ("Mr.").
std::vector<WordSpan> LexiconTokens(std::string_view text, const GenderLexicon& lexicon);

SwapResult Swap(std::string_view text, Direction direction, const GenderLexicon& lexicon);

struct GenderTermCounts {
  size_t male_count = 0;
  size_t female_count = 0;
  size_t total_tokens = 0;
};

GenderTermCounts CountGenderTerms(std::string_view text, const GenderLexicon& lexicon);

}  // namespace feedbias

#endif  // FEEDBIAS_LEXICON_H_
