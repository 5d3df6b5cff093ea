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

#include <gtest/gtest.h>

#include <cmath>

#include "feedbias/common.h"
#include "feedbias/rng.h"
#include "support.h"

namespace feedbias {
namespace {

using Strings = std::vector<std::string>;

const ResourceLexicons& Fixture() {
  static const ResourceLexicons r = LoadResources(
      testing::SourcePath("resources/fixtures/academic_words.txt"),
      testing::SourcePath("resources/fixtures/concreteness.csv"),
      testing::SourcePath("resources/markers.json"));
  return r;
}

TEST(Tokenize, ApostrophesNumbersAndCase) {
  EXPECT_EQ(Tokenize("Don\xE2\x80\x99t stop, it's 2024 and the 3rd try!"),
            (Strings{"don't", "stop", "it's", "and", "the", "3rd", "try"}));
  EXPECT_EQ(Tokenize("'quoted' words"), (Strings{"quoted", "words"}));
  EXPECT_EQ(Tokenize("well\xE2\x80\x94" "done"), (Strings{"well", "done"}));
  EXPECT_EQ(Tokenize("caf\xC3\xA9 na\xC3\xAFve"), (Strings{"caf\xC3\xA9", "na\xC3\xAFve"}));
  EXPECT_TRUE(Tokenize("12 34.5 ...").empty());
}

TEST(Sentences, TerminalsAndBoundaries) {
  const auto s = TokenizeSentences(
      "Great work! Is this clear?! Yes... \"Fine.\" Version 2.5 is out");
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0].terminal, Terminal::kExclamation);
  EXPECT_EQ(s[1].terminal, Terminal::kQuestion);
  EXPECT_EQ(s[2].terminal, Terminal::kPeriod);
  EXPECT_EQ(s[3].text, "\"Fine.\"");
  EXPECT_EQ(s[3].terminal, Terminal::kPeriod);
  EXPECT_EQ(s[4].terminal, Terminal::kNone);
  EXPECT_EQ(s[4].tokens, (Strings{"version", "is", "out"}));
}

TEST(Sentences, EllipsisCharacterAndEmptySentences) {
  const auto s = TokenizeSentences("Wait\xE2\x80\xA6 then go. ... !!! (Done.)");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].tokens, (Strings{"wait"}));
  EXPECT_EQ(s[1].tokens, (Strings{"then", "go"}));
  EXPECT_EQ(s[2].text, "(Done.)");
  EXPECT_TRUE(TokenizeSentences("").empty());
  EXPECT_TRUE(TokenizeSentences("?!").empty());
}

TEST(Sentences, QuoteAbsorbedIntoFirstSentence) {
  const auto s = TokenizeSentences("He said \"Go!\" Then left.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "He said \"Go!\"");
  EXPECT_EQ(s[0].terminal, Terminal::kExclamation);
  EXPECT_EQ(s[1].tokens, (Strings{"then", "left"}));
}

TEST(SentenceTypes, DefaultsToDeclarative) {
  const SentenceProps all = SentenceTypeProps(TokenizeSentences("One. Two. Three."));
  EXPECT_EQ(all.declarative, 1.0);
  const SentenceProps fragment = SentenceTypeProps(TokenizeSentences("well done"));
  EXPECT_EQ(fragment.declarative, 1.0);
  EXPECT_EQ(fragment.interrogative, 0.0);
}

TEST(Lemma, CandidateOrder) {
  EXPECT_EQ(LemmaCandidates("making"), (Strings{"making", "make", "mak"}));
  EXPECT_EQ(LemmaCandidates("uses"), (Strings{"uses", "use", "us"}));
  EXPECT_EQ(LemmaCandidates("used"), (Strings{"used", "use", "us"}));
  EXPECT_EQ(LemmaCandidates("is"), (Strings{"is"}));
  const std::unordered_set<std::string> set = {"analyse", "analysis"};
  EXPECT_EQ(FindLemma("analysed", set), "analyse");
  EXPECT_EQ(FindLemma("analysis", set), "analysis");
  EXPECT_EQ(FindLemma("banana", set), "");
}

TEST(HandExamples, ReproduceExactly) {
  EXPECT_EQ(AcademicRatio(Tokenize("we analyse data"), Fixture().academic_words), 2.0 / 3.0);
  EXPECT_EQ(ConcretenessMean(Tokenize("apple idea"), Fixture().concreteness).mean, 3.25);
  const PronounRates pr = PronounRatesOf(Tokenize("I like your essay"), Fixture().pronouns_first,
                                         Fixture().pronouns_second);
  EXPECT_EQ(pr.first_per100, 25.0);
  EXPECT_EQ(pr.second_per100, 25.0);
  const Supportiveness s = SupportivenessOf("You must avoid this. You could explore that.",
                                            DefaultSupportivePatterns(), DefaultControllingPatterns());
  EXPECT_EQ(s.controlling_count, 2u);
  EXPECT_EQ(s.supportive_count, 1u);
  EXPECT_EQ(s.total_tokens, 8u);
  EXPECT_EQ(s.score, -0.125);
  const SentenceProps props = SentenceTypeProps(TokenizeSentences("Great! Why? Ok."));
  EXPECT_EQ(props.declarative, 1.0 / 3.0);
  EXPECT_EQ(props.interrogative, 1.0 / 3.0);
  EXPECT_EQ(props.exclamative, 1.0 / 3.0);
  const PronounRates none = PronounRatesOf(Tokenize("the cat sat"), Fixture().pronouns_first,
                                           Fixture().pronouns_second);
  EXPECT_EQ(none.first_per100 + none.second_per100, 0.0);
}

TEST(Academic, Ratio) {
  EXPECT_NEAR(AcademicRatio({"analysed", "the", "data"}, Fixture().academic_words), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(AcademicRatio({}, Fixture().academic_words), 0.0);
}

TEST(Concreteness, MeanAndCoverage) {
  const ConcretenessResult r = ConcretenessMean({"apples", "and", "ideas"}, Fixture().concreteness);
  ASSERT_TRUE(r.mean.has_value());
  EXPECT_NEAR(*r.mean, (5.0 + 1.5) / 2, 1e-15);
  EXPECT_NEAR(r.coverage, 2.0 / 3.0, 1e-15);
  const ConcretenessResult none = ConcretenessMean({"zzz"}, Fixture().concreteness);
  EXPECT_FALSE(none.mean.has_value());
  EXPECT_EQ(none.coverage, 0.0);
}

TEST(Concreteness, ParsesBrysbaertColumns) {
  const auto norms = ParseConcretenessNorms("Word,Bigram,Conc.M\nApple,0,4.5\n");
  EXPECT_EQ(norms.at("apple"), 4.5);
  EXPECT_THROW(ParseConcretenessNorms("lemma,rating\nx,7\n"), Error);
  EXPECT_THROW(ParseConcretenessNorms("lemma,score\nx,3\n"), Error);
  EXPECT_THROW(ParseConcretenessNorms("lemma,rating\nx,high\n"), Error);
}

TEST(Academic, ParsesWordList) {
  const auto words = ParseAcademicWords("# header\nAnalyse\n\n data \n");
  EXPECT_EQ(words, (std::unordered_set<std::string>{"analyse", "data"}));
}

TEST(Pronouns, RatesPerHundred) {
  const PronounRates r = PronounRatesOf(Tokenize("I think you and your friend"),
                                        DefaultFirstPersonPronouns(), DefaultSecondPersonPronouns());
  EXPECT_NEAR(r.first_per100, 100.0 / 6, 1e-12);
  EXPECT_NEAR(r.second_per100, 200.0 / 6, 1e-12);
}

TEST(SentenceTypes, Proportions) {
  const SentenceProps p = SentenceTypeProps(TokenizeSentences("One. Two? Three! Four"));
  EXPECT_TRUE(p.has_sentences);
  EXPECT_EQ(p.declarative, 0.5);
  EXPECT_EQ(p.interrogative, 0.25);
  EXPECT_EQ(p.exclamative, 0.25);
  EXPECT_FALSE(SentenceTypeProps({}).has_sentences);
}

TEST(Supportiveness, HandCase) {
  const Supportiveness s = SupportivenessOf(
      "You could revise this. You must cite sources. Consider adding data.",
      DefaultSupportivePatterns(), DefaultControllingPatterns());
  EXPECT_EQ(s.total_tokens, 11u);
  EXPECT_EQ(s.supportive_count, 2u);
  EXPECT_EQ(s.controlling_count, 1u);
  EXPECT_NEAR(s.supportive_per100, 200.0 / 11, 1e-12);
  EXPECT_NEAR(s.controlling_per100, 100.0 / 11, 1e-12);
  EXPECT_NEAR(s.score, 1.0 / 11, 1e-15);
}

TEST(Supportiveness, LongestFirstWithinSentenceOnly) {
  const Strings supportive = {"you", "you could"};
  EXPECT_EQ(SupportivenessOf("You could ask you.", supportive, {}).supportive_count, 2u);
  EXPECT_EQ(SupportivenessOf("Could you could you", {"could you"}, {}).supportive_count, 2u);
  EXPECT_EQ(SupportivenessOf("Ask you. Could we?", {"you could"}, {}).supportive_count, 0u);
  EXPECT_EQ(SupportivenessOf("", supportive, {}).score, 0.0);
}

TEST(ComputeTextStats, FullRecord) {
  const TextStatsRecord r = ComputeTextStats(
      "e1", "M", "I analysed the data. Could you add apples? You must avoid ideas!", Fixture());
  EXPECT_EQ(r.essay_id, "e1");
  EXPECT_EQ(r.group_label, "M");
  EXPECT_EQ(r.total_tokens, 12u);
  EXPECT_EQ(r.sentence_count, 3u);
  EXPECT_NEAR(r.academic_ratio, 2.0 / 12, 1e-15);
  ASSERT_TRUE(r.concreteness_mean.has_value());
  EXPECT_NEAR(*r.concreteness_mean, 3.25, 1e-15);
  EXPECT_NEAR(r.first_person_per100, 100.0 / 12, 1e-12);
  EXPECT_NEAR(r.second_person_per100, 200.0 / 12, 1e-12);
  EXPECT_NEAR(r.sentence_props.interrogative, 1.0 / 3, 1e-15);
  EXPECT_EQ(r.supportive_count, 0u);
  EXPECT_EQ(r.controlling_count, 2u);
  EXPECT_NEAR(r.supportiveness, -2.0 / 12, 1e-15);
}

TextStatsRecord WithAcademic(const std::string& group, double academic, std::optional<double> conc) {
  TextStatsRecord r;
  r.group_label = group;
  r.academic_ratio = academic;
  r.concreteness_mean = conc;
  return r;
}

TEST(Aggregate, MeansAndSampleSd) {
  const auto groups = AggregateGroups({WithAcademic("B", 0.5, 2.0), WithAcademic("A", 0.2, std::nullopt),
                                       WithAcademic("B", 0.3, 4.0)});
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].group_label, "B");
  EXPECT_EQ(groups[0].records, 2u);
  ASSERT_EQ(groups[0].measures.size(), TextStatsMeasures().size());
  const MeasureSummary& academic = groups[0].measures[0];
  EXPECT_EQ(academic.measure, "academic_ratio");
  EXPECT_NEAR(*academic.mean, 0.4, 1e-15);
  EXPECT_NEAR(*academic.sd, std::sqrt(0.02), 1e-15);
  const MeasureSummary& conc_b = groups[0].measures[1];
  EXPECT_NEAR(*conc_b.sd, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(*groups[1].measures[0].sd, 0.0);
  EXPECT_EQ(groups[1].measures[1].count, 0u);
  EXPECT_FALSE(groups[1].measures[1].mean.has_value());
  EXPECT_THROW(AggregateGroups({}), Error);
}

TEST(Resources, ValidateAndPatternConfig) {
  EXPECT_NO_THROW(Fixture().Validate());
  const PatternConfig c = ParsePatternConfig(R"({"version": "v2", "supportive": ["nice try"]})");
  EXPECT_EQ(c.version, "v2");
  EXPECT_EQ(c.supportive, (Strings{"nice try"}));
  EXPECT_EQ(c.controlling, DefaultControllingPatterns());
  EXPECT_THROW(ParsePatternConfig("[1]"), Error);
  EXPECT_THROW(LoadResources("/nonexistent", "/nonexistent", ""), Error);
}

// Random feedback-like text from a small vocabulary that hits every marker.
std::string RandomText(SeededRng& rng) {
  static const Strings words = {"you", "could", "must", "consider", "perhaps", "avoid", "make",
                                "sure", "the", "data", "apples", "I", "we", "your", "essay",
                                "don't", "focus", "on", "need", "to", "analysed", "ideas"};
  static const Strings ends = {".", "?", "!", "..."};
  std::string text;
  const size_t sentences = 1 + static_cast<size_t>(rng.Below(5));
  for (size_t s = 0; s < sentences; ++s) {
    const size_t len = 1 + static_cast<size_t>(rng.Below(9));
    for (size_t w = 0; w < len; ++w) {
      if (!text.empty() && text.back() != ' ') text += ' ';
      text += words[static_cast<size_t>(rng.Below(words.size()))];
    }
    text += ends[static_cast<size_t>(rng.Below(ends.size()))];
  }
  return text;
}

TEST(TextStatsProperty, SelfConcatenationKeepsRates) {
  SeededRng rng(42, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = RandomText(rng);
    const TextStatsRecord a = ComputeTextStats("e", "g", text, Fixture());
    const TextStatsRecord b = ComputeTextStats("e", "g", text + " " + text, Fixture());
    EXPECT_EQ(b.total_tokens, 2 * a.total_tokens) << text;
    EXPECT_EQ(b.sentence_count, 2 * a.sentence_count) << text;
    for (const std::string& m : TextStatsMeasures()) {
      const auto va = MeasureValue(a, m), vb = MeasureValue(b, m);
      ASSERT_EQ(va.has_value(), vb.has_value()) << m;
      if (va) {
        EXPECT_NEAR(*va, *vb, 1e-12) << m << " on: " << text;
      }
    }
  }
}

TEST(TextStatsProperty, RangesAndSign) {
  SeededRng rng(7, 2);
  for (int trial = 0; trial < 300; ++trial) {
    const TextStatsRecord r = ComputeTextStats("e", "g", RandomText(rng), Fixture());
    EXPECT_GE(r.academic_ratio, 0.0);
    EXPECT_LE(r.academic_ratio, 1.0);
    if (r.concreteness_mean) {
      EXPECT_GE(*r.concreteness_mean, 1.0);
      EXPECT_LE(*r.concreteness_mean, 5.0);
    }
    EXPECT_LE(r.concreteness_coverage, 1.0);
    EXPECT_LE(r.first_person_per100 + r.second_person_per100, 100.0);
    EXPECT_NEAR(r.sentence_props.declarative + r.sentence_props.interrogative +
                    r.sentence_props.exclamative, 1.0, 1e-12);
    EXPECT_GE(r.supportiveness, -1.0);
    EXPECT_LE(r.supportiveness, 1.0);
    const long diff = static_cast<long>(r.supportive_count) - static_cast<long>(r.controlling_count);
    EXPECT_EQ(r.supportiveness > 0, diff > 0);
    EXPECT_EQ(r.supportiveness < 0, diff < 0);
  }
}

}  // namespace
}  // namespace feedbias
