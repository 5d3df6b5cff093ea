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

#include "feedbias/lexicon.h"

#include <string>
#include <utility>

#include "feedbias/text.h"

namespace feedbias {
namespace {

bool IsValidForm(std::string_view form) {
  if (form.empty()) return false;
  size_t letters = 0;
  for (size_t i = 0; i < form.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(form[i]);
    if (c == '.') {
      if (i + 1 != form.size()) return false;  // period only as a title suffix
      continue;
    }
    if (!IsAsciiAlpha(c) && c < 0x80) return false;
    ++letters;
  }
  return letters > 0;
}

size_t DirectionSlot(Direction direction) {
  return direction == Direction::kM2F ? 0 : 1;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpaceByte(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && IsSpaceByte(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

GenderLexicon::GenderLexicon(std::vector<GenderPair> pairs, std::vector<AmbiguousRule> rules)
    : pairs_(std::move(pairs)), rules_(std::move(rules)) {
  for (size_t i = 0; i < pairs_.size(); ++i) {
    GenderPair& pair = pairs_[i];
    if (!IsValidForm(pair.male_form) || !IsValidForm(pair.female_form)) {
      Fail(ErrorKind::kValidation, "invalid lexicon form in pair " + std::to_string(i + 1) +
                                       ": '" + pair.male_form + "' / '" + pair.female_form + "'");
    }
    const std::string male = AsciiLower(pair.male_form);
    const std::string female = AsciiLower(pair.female_form);
    if (auto [it, inserted] = male_index_.emplace(male, i); !inserted) {
      Fail(ErrorKind::kValidation, "duplicate male form '" + male + "' in pairs " +
                                       std::to_string(it->second + 1) + " and " +
                                       std::to_string(i + 1));
    }
    if (auto [it, inserted] = female_index_.emplace(female, i); !inserted) {
      Fail(ErrorKind::kValidation, "duplicate female form '" + female + "' in pairs " +
                                       std::to_string(it->second + 1) + " and " +
                                       std::to_string(i + 1));
    }
  }
  for (size_t i = 0; i < rules_.size(); ++i) {
    AmbiguousRule& rule = rules_[i];
    rule.surface = AsciiLower(rule.surface);
    const bool source_ok = rule.direction == Direction::kM2F ? IsMaleForm(rule.surface)
                                                             : IsFemaleForm(rule.surface);
    const auto target_ok = [&](const std::string& form) {
      const std::string lower = AsciiLower(form);
      return rule.direction == Direction::kM2F ? IsFemaleForm(lower) : IsMaleForm(lower);
    };
    if (!source_ok || !target_ok(rule.replacement_a) || !target_ok(rule.replacement_b)) {
      Fail(ErrorKind::kValidation, "ambiguous rule for '" + rule.surface +
                                       "' references forms outside the lexicon");
    }
    if (!rule_index_[DirectionSlot(rule.direction)].emplace(rule.surface, i).second) {
      Fail(ErrorKind::kValidation, "duplicate ambiguous rule for '" + rule.surface + "'");
    }
  }
}

std::vector<AmbiguousRule> GenderLexicon::DefaultAmbiguousRules() {
  return {
      {"her", Direction::kF2M, "possessive-if-followed-by-word", "his", "him"},
      {"his", Direction::kM2F, "possessive-if-followed-by-word", "her", "hers"},
      {"hers", Direction::kF2M, "independent-possessive", "his", "his"},
  };
}

const std::string* GenderLexicon::Counterpart(std::string_view lower_form,
                                              Direction direction) const {
  const std::string key(lower_form);
  if (direction == Direction::kM2F) {
    const auto it = male_index_.find(key);
    return it == male_index_.end() ? nullptr : &pairs_[it->second].female_form;
  }
  const auto it = female_index_.find(key);
  return it == female_index_.end() ? nullptr : &pairs_[it->second].male_form;
}

const AmbiguousRule* GenderLexicon::Ambiguous(std::string_view lower_form,
                                              Direction direction) const {
  const auto& index = rule_index_[DirectionSlot(direction)];
  const auto it = index.find(std::string(lower_form));
  return it == index.end() ? nullptr : &rules_[it->second];
}

bool GenderLexicon::IsMaleForm(std::string_view lower_form) const {
  return male_index_.contains(std::string(lower_form));
}

bool GenderLexicon::IsFemaleForm(std::string_view lower_form) const {
  return female_index_.contains(std::string(lower_form));
}

bool GenderLexicon::IsPeriodForm(std::string_view lower_form) const {
  return !lower_form.empty() && lower_form.back() == '.' &&
         (IsMaleForm(lower_form) || IsFemaleForm(lower_form));
}

GenderLexicon ParseLexicon(std::string_view contents, const std::string& origin) {
  std::vector<GenderPair> pairs;
  std::vector<AmbiguousRule> rules;
  bool explicit_rules = false;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= contents.size()) {
    size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty() || line.front() == '#') {
      if (end == contents.size()) break;
      continue;
    }
    const auto fields = SplitTabs(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields[0] == "@ambiguous") {
      if (fields.size() != 6) {
        Fail(ErrorKind::kValidation, where + ": @ambiguous needs 5 tab-separated fields");
      }
      explicit_rules = true;
      rules.push_back({std::string(fields[1]), ParseDirection(fields[2]),
                       std::string(fields[3]), std::string(fields[4]),
                       std::string(fields[5])});
    } else {
      if (fields.size() != 2 || !IsValidForm(Trim(fields[0])) ||
          !IsValidForm(Trim(fields[1]))) {
        Fail(ErrorKind::kValidation,
             where + ": malformed line, expected male_form<TAB>female_form");
      }
      pairs.push_back({std::string(Trim(fields[0])), std::string(Trim(fields[1]))});
    }
    if (end == contents.size()) break;
  }
  if (!explicit_rules) {
    std::unordered_map<std::string, bool> male, female;
    for (const auto& p : pairs) {
      male[AsciiLower(p.male_form)] = true;
      female[AsciiLower(p.female_form)] = true;
    }
    for (auto& rule : GenderLexicon::DefaultAmbiguousRules()) {
      auto& source = rule.direction == Direction::kM2F ? male : female;
      auto& target = rule.direction == Direction::kM2F ? female : male;
      if (source.contains(rule.surface) && target.contains(rule.replacement_a) &&
          target.contains(rule.replacement_b)) {
        rules.push_back(std::move(rule));
      }
    }
  }
  try {
    return GenderLexicon(std::move(pairs), std::move(rules));
  } catch (const Error& e) {
    Fail(e.kind(), origin + ": " + e.what());
  }
}

GenderLexicon LoadLexicon(const std::string& path) {
  return ParseLexicon(ReadFile(path), path);
}

std::string_view SubstitutionRuleName(SubstitutionRule rule) {
  return rule == SubstitutionRule::kExact ? "exact" : "ambiguous-heuristic";
}

std::vector<WordSpan> LexiconTokens(std::string_view text, const GenderLexicon& lexicon) {
  std::vector<WordSpan> spans = WordSpans(text);
  for (WordSpan& span : spans) {
    if (span.end < text.size() && text[span.end] == '.') {
      const std::string with_period = AsciiLower(text.substr(span.begin, span.end - span.begin + 1));
      if (lexicon.IsPeriodForm(with_period)) ++span.end;
    }
  }
  return spans;
}

SwapResult Swap(std::string_view text, Direction direction, const GenderLexicon& lexicon) {
  SwapResult result;
  const std::vector<WordSpan> tokens = LexiconTokens(text, lexicon);
  result.output_text.reserve(text.size() + 16);
  size_t cursor = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string_view token = tokens[i].View(text);
    const std::string lower = AsciiLower(token);
    std::string_view stored;
    SubstitutionRule rule = SubstitutionRule::kExact;
    if (const AmbiguousRule* ambiguous = lexicon.Ambiguous(lower, direction)) {
      bool followed_by_word = false;
      if (i + 1 < tokens.size()) {
        followed_by_word = tokens[i + 1].begin > tokens[i].end;
        for (size_t p = tokens[i].end; p < tokens[i + 1].begin; ++p) {
          if (!IsSpaceByte(static_cast<unsigned char>(text[p]))) followed_by_word = false;
        }
        const unsigned char next = static_cast<unsigned char>(text[tokens[i + 1].begin]);
        followed_by_word = followed_by_word && (IsAsciiAlpha(next) || next >= 0x80);
      }
      stored = followed_by_word ? ambiguous->replacement_a : ambiguous->replacement_b;
      rule = SubstitutionRule::kAmbiguousHeuristic;
    } else if (const std::string* counterpart = lexicon.Counterpart(lower, direction)) {
      stored = *counterpart;
    } else {
      continue;
    }
    const CaseClass case_class = ClassifyCase(token);
    std::string replacement = ApplyCase(stored, case_class);
    result.output_text.append(text.substr(cursor, tokens[i].begin - cursor));
    result.output_text.append(replacement);
    cursor = tokens[i].end;
    if (rule == SubstitutionRule::kAmbiguousHeuristic) ++result.ambiguous_count;
    result.substitutions.push_back({i, std::string(token), std::move(replacement), rule});
  }
  result.output_text.append(text.substr(cursor));
  return result;
}

GenderTermCounts CountGenderTerms(std::string_view text, const GenderLexicon& lexicon) {
  GenderTermCounts counts;
  for (const WordSpan& span : LexiconTokens(text, lexicon)) {
    const std::string lower = AsciiLower(span.View(text));
    ++counts.total_tokens;
    if (lexicon.IsMaleForm(lower)) ++counts.male_count;
    if (lexicon.IsFemaleForm(lower)) ++counts.female_count;
  }
  return counts;
}

}  // namespace feedbias
