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

#ifndef FEEDBIAS_TEXTSTATS_H_
#define FEEDBIAS_TEXTSTATS_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace feedbias {

enum class Terminal { kPeriod, kQuestion, kExclamation, kNone };

struct Sentence {
  std::string text;
  Terminal terminal = Terminal::kNone;
  std::vector<std::string> tokens;  // lowercased
};

// Word tokens are runs of letters, digits and non-ASCII bytes, joined across
// internal apostrophes ("don't" is one token; U+2019 becomes '). Tokens
// without a letter (pure numbers) are dropped.
std::vector<std::string> Tokenize(std::string_view text);

// Splits after each run of . ? ! (the first mark decides the terminal),
// absorbing trailing closing quotes and brackets. A period between two digits
// does not end a sentence. Trailing text without a mark has terminal kNone.
// Sentences without tokens are dropped.
std::vector<Sentence> TokenizeSentences(std::string_view text);

struct ResourceLexicons {
  std::unordered_set<std::string> academic_words;
  std::unordered_map<std::string, double> concreteness;
  std::unordered_set<std::string> pronouns_first;
  std::unordered_set<std::string> pronouns_second;
  std::vector<std::string> supportive_patterns;
  std::vector<std::string> controlling_patterns;
  std::string patterns_version;

  // Non-empty sets; ratings in [1, 5]; patterns lowercase and non-empty.
  void Validate() const;
};

std::vector<std::string> DefaultSupportivePatterns();
std::vector<std::string> DefaultControllingPatterns();
std::unordered_set<std::string> DefaultFirstPersonPronouns();
std::unordered_set<std::string> DefaultSecondPersonPronouns();

// One lowercase headword per line; '#' starts a comment line.
std::unordered_set<std::string> ParseAcademicWords(std::string_view content);
// CSV with a header row. The lemma column is "lemma" or "Word", the rating
// column "rating" or "Conc.M".
std::unordered_map<std::string, double> ParseConcretenessNorms(std::string_view content);

struct PatternConfig {
  std::string version = "markers-v1";
  std::vector<std::string> supportive;
  std::vector<std::string> controlling;
  std::unordered_set<std::string> pronouns_first;
  std::unordered_set<std::string> pronouns_second;
};

// {"version", "supportive", "controlling", optional "pronouns_first",
//  "pronouns_second"}; missing lists take the defaults.
PatternConfig ParsePatternConfig(std::string_view json);
PatternConfig DefaultPatternConfig();

// Empty `patterns_path` uses the default pattern config.
ResourceLexicons LoadResources(const std::string& academic_path,
                               const std::string& concreteness_path,
                               const std::string& patterns_path);

// Lookup keys for a token in priority order: the surface form, then suffix
// strips s, d (e-restoring "ed"), es, ed, ing + e, ing. Stems shorter than
// two characters are skipped.
std::vector<std::string> LemmaCandidates(std::string_view token);

// First candidate found in `set`, or empty.
template <typename Set>
std::string FindLemma(std::string_view token, const Set& set) {
  for (std::string& candidate : LemmaCandidates(token)) {
    if (set.count(candidate)) return candidate;
  }
  return {};
}

double AcademicRatio(const std::vector<std::string>& tokens,
                     const std::unordered_set<std::string>& academic_words);

struct ConcretenessResult {
  std::optional<double> mean;  // absent when no token is covered
  double coverage = 0.0;       // covered tokens / all tokens
};

ConcretenessResult ConcretenessMean(const std::vector<std::string>& tokens,
                                    const std::unordered_map<std::string, double>& norms);

struct PronounRates {
  double first_per100 = 0.0;
  double second_per100 = 0.0;
};

PronounRates PronounRatesOf(const std::vector<std::string>& tokens,
                            const std::unordered_set<std::string>& first,
                            const std::unordered_set<std::string>& second);

struct SentenceProps {
  double declarative = 0.0;
  double interrogative = 0.0;
  double exclamative = 0.0;
  bool has_sentences = false;
};

SentenceProps SentenceTypeProps(const std::vector<Sentence>& sentences);

struct Supportiveness {
  size_t supportive_count = 0;
  size_t controlling_count = 0;
  size_t total_tokens = 0;
  double supportive_per100 = 0.0;
  double controlling_per100 = 0.0;
  double score = 0.0;  // (supportive - controlling) / total; 0 for empty text
};

// Case-insensitive token-sequence matches inside each sentence; within a
// class, matches are non-overlapping and longest-first.
Supportiveness SupportivenessOf(std::string_view text, const std::vector<std::string>& supportive,
                                const std::vector<std::string>& controlling);

struct TextStatsRecord {
  std::string essay_id;
  std::string group_label;
  size_t total_tokens = 0;
  size_t sentence_count = 0;
  double academic_ratio = 0.0;
  std::optional<double> concreteness_mean;
  double concreteness_coverage = 0.0;
  double first_person_per100 = 0.0;
  double second_person_per100 = 0.0;
  SentenceProps sentence_props;
  size_t supportive_count = 0;
  size_t controlling_count = 0;
  double supportive_per100 = 0.0;
  double controlling_per100 = 0.0;
  double supportiveness = 0.0;
};

TextStatsRecord ComputeTextStats(std::string_view essay_id, std::string_view group_label,
                                 std::string_view text, const ResourceLexicons& resources);

// Measurement names in summary order.
const std::vector<std::string>& TextStatsMeasures();
// Value of a named measurement; absent only for a missing concreteness mean.
std::optional<double> MeasureValue(const TextStatsRecord& record, std::string_view measure);

struct MeasureSummary {
  std::string measure;
  size_t count = 0;  // records contributing
  std::optional<double> mean;
  std::optional<double> sd;  // sample sd; 0 for a single record
};

struct GroupSummary {
  std::string group_label;
  size_t records = 0;
  std::vector<MeasureSummary> measures;  // TextStatsMeasures() order
};

// Groups in first-appearance order. Throws when `records` is empty.
std::vector<GroupSummary> AggregateGroups(const std::vector<TextStatsRecord>& records);

}  // namespace feedbias

#endif  // FEEDBIAS_TEXTSTATS_H_
