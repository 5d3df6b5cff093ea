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

#include "feedbias/textstats.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "feedbias/common.h"
#include "feedbias/corpus.h"
#include "feedbias/text.h"

namespace feedbias {
namespace {

using nlohmann::json;

// Length of a UTF-8 general punctuation sequence (U+2000..U+206F) or NBSP
// starting at i, else 0.
size_t UnicodePunctuationLength(std::string_view s, size_t i) {
  const auto at = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  if (i + 1 < s.size() && at(i) == 0xC2 && at(i + 1) == 0xA0) return 2;
  if (i + 2 < s.size() && at(i) == 0xE2 && (at(i + 1) == 0x80 || at(i + 1) == 0x81)) {
    if (at(i + 1) == 0x81 && at(i + 2) > 0xAF) return 0;
    return 3;
  }
  return 0;
}

bool IsRightSingleQuote(std::string_view s, size_t i) {
  return s.substr(i, 3) == "\xE2\x80\x99";
}

bool IsWordStart(std::string_view s, size_t i) {
  return i < s.size() && IsWordByte(static_cast<unsigned char>(s[i])) &&
         UnicodePunctuationLength(s, i) == 0;
}

bool HasLetter(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return IsAsciiAlpha(u) || u >= 0x80;
  });
}

void AppendTokens(std::string_view text, std::vector<std::string>& out) {
  size_t i = 0;
  while (i < text.size()) {
    if (!IsWordStart(text, i)) {
      const size_t skip = UnicodePunctuationLength(text, i);
      i += skip ? skip : 1;
      continue;
    }
    std::string token;
    while (i < text.size()) {
      if (IsWordStart(text, i)) {
        token += text[i++];
      } else if (text[i] == '\'' && IsWordStart(text, i + 1)) {
        token += '\'';
        ++i;
      } else if (IsRightSingleQuote(text, i) && IsWordStart(text, i + 3)) {
        token += '\'';
        i += 3;
      } else {
        break;
      }
    }
    if (HasLetter(token)) out.push_back(AsciiLower(token));
  }
}

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool IsClosingAt(std::string_view s, size_t i, size_t* length) {
  const char c = s[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') {
    *length = 1;
    return true;
  }
  if (s.substr(i, 3) == "\xE2\x80\x99" || s.substr(i, 3) == "\xE2\x80\x9D") {
    *length = 3;
    return true;
  }
  return false;
}

Terminal TerminalOf(char c) {
  switch (c) {
    case '?':
      return Terminal::kQuestion;
    case '!':
      return Terminal::kExclamation;
    default:
      return Terminal::kPeriod;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpaceByte(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && IsSpaceByte(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double Per100(size_t count, size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

// Non-overlapping, longest-first matches of `patterns` over `tokens`.
size_t CountMatches(const std::vector<std::string>& tokens,
                    const std::vector<std::vector<std::string>>& patterns) {
  size_t count = 0, i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    for (const auto& pattern : patterns) {
      if (pattern.size() <= matched || i + pattern.size() > tokens.size()) continue;
      if (std::equal(pattern.begin(), pattern.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        matched = pattern.size();
      }
    }
    if (matched > 0) {
      ++count;
      i += matched;
    } else {
      ++i;
    }
  }
  return count;
}

std::vector<std::vector<std::string>> TokenizePatterns(const std::vector<std::string>& patterns) {
  std::vector<std::vector<std::string>> out;
  for (const std::string& p : patterns) {
    auto tokens = Tokenize(p);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<std::string> StringList(const json& value, const char* key) {
  Require(value.is_array(), std::string("pattern config: '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const json& item : value) {
    Require(item.is_string(), std::string("pattern config: '") + key + "' entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  AppendTokens(text, out);
  return out;
}

std::vector<Sentence> TokenizeSentences(std::string_view text) {
  std::vector<Sentence> sentences;
  const auto emit = [&](size_t begin, size_t end, Terminal terminal) {
    Sentence s;
    s.text = std::string(Trim(text.substr(begin, end - begin)));
    s.terminal = terminal;
    s.tokens = Tokenize(s.text);
    if (!s.tokens.empty()) sentences.push_back(std::move(s));
  };
  size_t start = 0, i = 0;
  while (i < text.size()) {
    const char c = text[i];
    const bool ellipsis = text.substr(i, 3) == "\xE2\x80\xA6";
    const bool mark = c == '.' || c == '?' || c == '!' || ellipsis;
    if (!mark || (c == '.' && i > 0 && IsDigit(text[i - 1]) && i + 1 < text.size() &&
                  IsDigit(text[i + 1]))) {
      ++i;
      continue;
    }
    const Terminal terminal = ellipsis ? Terminal::kPeriod : TerminalOf(c);
    while (i < text.size()) {
      if (text[i] == '.' || text[i] == '?' || text[i] == '!') {
        ++i;
      } else if (text.substr(i, 3) == "\xE2\x80\xA6") {
        i += 3;
      } else {
        break;
      }
    }
    size_t length = 0;
    while (i < text.size() && IsClosingAt(text, i, &length)) i += length;
    emit(start, i, terminal);
    start = i;
  }
  if (start < text.size()) emit(start, text.size(), Terminal::kNone);
  return sentences;
}

void ResourceLexicons::Validate() const {
  Require(!academic_words.empty(), "academic word list is empty");
  Require(!concreteness.empty(), "concreteness norms are empty");
  Require(!pronouns_first.empty() && !pronouns_second.empty(), "pronoun sets must be non-empty");
  Require(!supportive_patterns.empty() && !controlling_patterns.empty(),
          "supportive and controlling pattern lists must be non-empty");
  for (const auto& [lemma, rating] : concreteness) {
    Require(rating >= 1.0 && rating <= 5.0,
            "concreteness rating for '" + lemma + "' is outside [1, 5]");
  }
  for (const auto* list : {&supportive_patterns, &controlling_patterns}) {
    for (const std::string& p : *list) {
      Require(!Tokenize(p).empty(), "empty marker pattern '" + p + "'");
      Require(p == AsciiLower(p), "marker pattern '" + p + "' must be lowercase");
    }
  }
}

std::vector<std::string> DefaultSupportivePatterns() {
  return {"you could", "you might", "you may want", "consider", "perhaps", "one option",
          "feel free"};
}

std::vector<std::string> DefaultControllingPatterns() {
  return {"you must", "you need to", "you have to", "make sure", "avoid", "focus on",
          "do not", "don't"};
}

std::unordered_set<std::string> DefaultFirstPersonPronouns() {
  return {"i", "me", "my", "mine", "we", "us", "our", "ours", "myself", "ourselves"};
}

std::unordered_set<std::string> DefaultSecondPersonPronouns() {
  return {"you", "your", "yours", "yourself", "yourselves"};
}

std::unordered_set<std::string> ParseAcademicWords(std::string_view content) {
  std::unordered_set<std::string> words;
  size_t pos = 0;
  while (pos <= content.size()) {
    const size_t nl = std::min(content.find('\n', pos), content.size());
    const std::string_view line = Trim(content.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    words.insert(AsciiLower(line));
  }
  return words;
}

std::unordered_map<std::string, double> ParseConcretenessNorms(std::string_view content) {
  const auto rows = ParseCsv(content);
  Require(!rows.empty(), "concreteness norms: missing header row");
  const auto& header = rows.front();
  const auto find = [&](std::initializer_list<const char*> names) -> size_t {
    for (const char* name : names) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) return static_cast<size_t>(it - header.begin());
    }
    Fail(ErrorKind::kValidation, std::string("concreteness norms: missing column '") +
                                     *names.begin() + "'");
  };
  const size_t lemma_col = find({"lemma", "Word"});
  const size_t rating_col = find({"rating", "Conc.M"});
  std::unordered_map<std::string, double> norms;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(lemma_col, rating_col)) continue;
    const std::string lemma = AsciiLower(Trim(row[lemma_col]));
    if (lemma.empty()) continue;
    double rating = 0.0;
    try {
      size_t used = 0;
      rating = std::stod(row[rating_col], &used);
    } catch (const std::exception&) {
      Fail(ErrorKind::kValidation, "concreteness norms: bad rating on row " + std::to_string(r + 1));
    }
    Require(rating >= 1.0 && rating <= 5.0,
            "concreteness norms: rating outside [1, 5] on row " + std::to_string(r + 1));
    norms[lemma] = rating;
  }
  return norms;
}

PatternConfig DefaultPatternConfig() {
  return {"markers-v1", DefaultSupportivePatterns(), DefaultControllingPatterns(),
          DefaultFirstPersonPronouns(), DefaultSecondPersonPronouns()};
}

PatternConfig ParsePatternConfig(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kValidation, std::string("pattern config: ") + e.what());
  }
  Require(doc.is_object(), "pattern config must be a JSON object");
  PatternConfig config = DefaultPatternConfig();
  if (doc.contains("version")) config.version = doc.at("version").get<std::string>();
  if (doc.contains("supportive")) config.supportive = StringList(doc["supportive"], "supportive");
  if (doc.contains("controlling")) config.controlling = StringList(doc["controlling"], "controlling");
  if (doc.contains("pronouns_first")) {
    const auto list = StringList(doc["pronouns_first"], "pronouns_first");
    config.pronouns_first = {list.begin(), list.end()};
  }
  if (doc.contains("pronouns_second")) {
    const auto list = StringList(doc["pronouns_second"], "pronouns_second");
    config.pronouns_second = {list.begin(), list.end()};
  }
  return config;
}

ResourceLexicons LoadResources(const std::string& academic_path,
                               const std::string& concreteness_path,
                               const std::string& patterns_path) {
  ResourceLexicons r;
  r.academic_words = ParseAcademicWords(ReadFile(academic_path));
  r.concreteness = ParseConcretenessNorms(ReadFile(concreteness_path));
  const PatternConfig patterns =
      patterns_path.empty() ? DefaultPatternConfig() : ParsePatternConfig(ReadFile(patterns_path));
  r.supportive_patterns = patterns.supportive;
  r.controlling_patterns = patterns.controlling;
  r.pronouns_first = patterns.pronouns_first;
  r.pronouns_second = patterns.pronouns_second;
  r.patterns_version = patterns.version;
  r.Validate();
  return r;
}

std::vector<std::string> LemmaCandidates(std::string_view token) {
  std::vector<std::string> out{std::string(token)};
  const auto strip = [&](std::string_view suffix, std::string_view restore) {
    if (token.size() <= suffix.size() || token.substr(token.size() - suffix.size()) != suffix) return;
    const std::string_view stem = token.substr(0, token.size() - suffix.size());
    if (stem.size() < 2) return;
    std::string candidate = std::string(stem) + std::string(restore);
    if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(std::move(candidate));
  };
  strip("s", "");
  strip("ed", "e");
  strip("es", "");
  strip("ed", "");
  strip("ing", "e");
  strip("ing", "");
  return out;
}

double AcademicRatio(const std::vector<std::string>& tokens,
                     const std::unordered_set<std::string>& academic_words) {
  if (tokens.empty()) return 0.0;
  size_t academic = 0;
  for (const std::string& t : tokens) {
    if (!FindLemma(t, academic_words).empty()) ++academic;
  }
  return static_cast<double>(academic) / static_cast<double>(tokens.size());
}

ConcretenessResult ConcretenessMean(const std::vector<std::string>& tokens,
                                    const std::unordered_map<std::string, double>& norms) {
  ConcretenessResult result;
  double sum = 0.0;
  size_t covered = 0;
  for (const std::string& t : tokens) {
    const std::string lemma = FindLemma(t, norms);
    if (lemma.empty()) continue;
    sum += norms.at(lemma);
    ++covered;
  }
  if (covered > 0) {
    result.mean = sum / static_cast<double>(covered);
    result.coverage = static_cast<double>(covered) / static_cast<double>(tokens.size());
  }
  return result;
}

PronounRates PronounRatesOf(const std::vector<std::string>& tokens,
                            const std::unordered_set<std::string>& first,
                            const std::unordered_set<std::string>& second) {
  size_t n_first = 0, n_second = 0;
  for (const std::string& t : tokens) {
    if (first.count(t)) ++n_first;
    if (second.count(t)) ++n_second;
  }
  return {Per100(n_first, tokens.size()), Per100(n_second, tokens.size())};
}

SentenceProps SentenceTypeProps(const std::vector<Sentence>& sentences) {
  SentenceProps props;
  if (sentences.empty()) return props;
  size_t decl = 0, interrog = 0, exclam = 0;
  for (const Sentence& s : sentences) {
    switch (s.terminal) {
      case Terminal::kQuestion:
        ++interrog;
        break;
      case Terminal::kExclamation:
        ++exclam;
        break;
      default:
        ++decl;
    }
  }
  const double n = static_cast<double>(sentences.size());
  props.declarative = static_cast<double>(decl) / n;
  props.interrogative = static_cast<double>(interrog) / n;
  props.exclamative = static_cast<double>(exclam) / n;
  props.has_sentences = true;
  return props;
}

Supportiveness SupportivenessOf(std::string_view text, const std::vector<std::string>& supportive,
                                const std::vector<std::string>& controlling) {
  const auto supp = TokenizePatterns(supportive);
  const auto ctrl = TokenizePatterns(controlling);
  Supportiveness s;
  for (const Sentence& sentence : TokenizeSentences(text)) {
    s.total_tokens += sentence.tokens.size();
    s.supportive_count += CountMatches(sentence.tokens, supp);
    s.controlling_count += CountMatches(sentence.tokens, ctrl);
  }
  s.supportive_per100 = Per100(s.supportive_count, s.total_tokens);
  s.controlling_per100 = Per100(s.controlling_count, s.total_tokens);
  if (s.total_tokens > 0) {
    s.score = (static_cast<double>(s.supportive_count) - static_cast<double>(s.controlling_count)) /
              static_cast<double>(s.total_tokens);
  }
  return s;
}

TextStatsRecord ComputeTextStats(std::string_view essay_id, std::string_view group_label,
                                 std::string_view text, const ResourceLexicons& resources) {
  TextStatsRecord r;
  r.essay_id = essay_id;
  r.group_label = group_label;
  const std::vector<Sentence> sentences = TokenizeSentences(text);
  std::vector<std::string> tokens;
  for (const Sentence& s : sentences) tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
  r.total_tokens = tokens.size();
  r.sentence_count = sentences.size();
  r.academic_ratio = AcademicRatio(tokens, resources.academic_words);
  const ConcretenessResult concreteness = ConcretenessMean(tokens, resources.concreteness);
  r.concreteness_mean = concreteness.mean;
  r.concreteness_coverage = concreteness.coverage;
  const PronounRates pronouns =
      PronounRatesOf(tokens, resources.pronouns_first, resources.pronouns_second);
  r.first_person_per100 = pronouns.first_per100;
  r.second_person_per100 = pronouns.second_per100;
  r.sentence_props = SentenceTypeProps(sentences);
  const Supportiveness s =
      SupportivenessOf(text, resources.supportive_patterns, resources.controlling_patterns);
  r.supportive_count = s.supportive_count;
  r.controlling_count = s.controlling_count;
  r.supportive_per100 = s.supportive_per100;
  r.controlling_per100 = s.controlling_per100;
  r.supportiveness = s.score;
  return r;
}

const std::vector<std::string>& TextStatsMeasures() {
  static const std::vector<std::string> measures = {
      "academic_ratio",      "concreteness_mean",  "first_person_per100",
      "second_person_per100", "declarative",       "interrogative",
      "exclamative",         "supportive_per100",  "controlling_per100",
      "supportiveness"};
  return measures;
}

std::optional<double> MeasureValue(const TextStatsRecord& r, std::string_view measure) {
  if (measure == "academic_ratio") return r.academic_ratio;
  if (measure == "concreteness_mean") return r.concreteness_mean;
  if (measure == "first_person_per100") return r.first_person_per100;
  if (measure == "second_person_per100") return r.second_person_per100;
  if (measure == "declarative") return r.sentence_props.declarative;
  if (measure == "interrogative") return r.sentence_props.interrogative;
  if (measure == "exclamative") return r.sentence_props.exclamative;
  if (measure == "supportive_per100") return r.supportive_per100;
  if (measure == "controlling_per100") return r.controlling_per100;
  if (measure == "supportiveness") return r.supportiveness;
  Fail(ErrorKind::kValidation, "unknown text measure '" + std::string(measure) + "'");
}

std::vector<GroupSummary> AggregateGroups(const std::vector<TextStatsRecord>& records) {
  Require(!records.empty(), "text statistics aggregation needs at least one record");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TextStatsRecord*>> groups;
  for (const TextStatsRecord& r : records) {
    auto& members = groups[r.group_label];
    if (members.empty()) order.push_back(r.group_label);
    members.push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const std::string& label : order) {
    const auto& members = groups.at(label);
    GroupSummary g;
    g.group_label = label;
    g.records = members.size();
    for (const std::string& measure : TextStatsMeasures()) {
      std::vector<double> values;
      for (const TextStatsRecord* r : members) {
        if (const auto v = MeasureValue(*r, measure)) values.push_back(*v);
      }
      MeasureSummary m;
      m.measure = measure;
      m.count = values.size();
      if (!values.empty()) {
        double sum = 0.0;
        for (const double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (const double v : values) ss += (v - mean) * (v - mean);
        m.mean = mean;
        m.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
      }
      g.measures.push_back(std::move(m));
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace feedbias
