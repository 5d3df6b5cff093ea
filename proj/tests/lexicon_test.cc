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

#include <gtest/gtest.h>

#include "feedbias/rng.h"
#include "support.h"

namespace feedbias {
namespace {

const GenderLexicon& Shipped() {
  static const GenderLexicon lexicon = LoadLexicon(testing::SourcePath("resources/gender_pairs.tsv"));
  return lexicon;
}

TEST(LexiconParse, TwoPairs) {
  const GenderLexicon lexicon = ParseLexicon("he\tshe\ncowboy\tcowgirl\n");
  EXPECT_EQ(lexicon.size(), 2u);
  EXPECT_EQ(*lexicon.Counterpart("cowboy", Direction::kM2F), "cowgirl");
  EXPECT_EQ(*lexicon.Counterpart("she", Direction::kF2M), "he");
  EXPECT_EQ(lexicon.Counterpart("table", Direction::kM2F), nullptr);
}

TEST(LexiconParse, DuplicateFormIsAnError) {
  try {
    ParseLexicon("he\tshe\nhe\therself\n", "dup.tsv");
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find("'he'"), std::string::npos);
  }
}

TEST(LexiconParse, MalformedLineIsAnError) {
  EXPECT_THROW(ParseLexicon("he\n"), Error);
  EXPECT_THROW(ParseLexicon("he\tshe\textra\n"), Error);
}

TEST(LexiconParse, CommentsAndBlankLinesAreSkipped) {
  const GenderLexicon lexicon = ParseLexicon("# pairs\n\nhe\tshe\n");
  EXPECT_EQ(lexicon.size(), 1u);
}

TEST(LexiconParse, ShippedLexiconHas192Pairs) { EXPECT_EQ(Shipped().size(), 192u); }

TEST(Swap, NeutralSentenceIsUnchanged) {
  const SwapResult r = Swap("The table is red.", Direction::kM2F, Shipped());
  EXPECT_EQ(r.output_text, "The table is red.");
  EXPECT_TRUE(r.substitutions.empty());
}

TEST(Swap, MaleExcerptToFemale) {
  const SwapResult r = Swap(
      "All he cares about is Seagoing Cowboys he want to be one. Well maybe if he is one then he might...",
      Direction::kM2F, Shipped());
  EXPECT_EQ(r.output_text,
            "All she cares about is Seagoing Cowgirls she want to be one. Well maybe if she is one then she might...");
  EXPECT_EQ(r.substitutions.size(), 5u);
  EXPECT_EQ(r.ambiguous_count, 0u);
}

TEST(Swap, FemaleExcerptToMale) {
  const SwapResult r = Swap(
      "Imagine a woman is late to work and her hair is a mess, she threw random clothees on, and all her work papers are stored in random places in her briefcase.",
      Direction::kF2M, Shipped());
  EXPECT_EQ(r.output_text,
            "Imagine a man is late to work and his hair is a mess, he threw random clothees on, and all his work papers are stored in random places in his briefcase.");
  EXPECT_EQ(r.ambiguous_count, 3u);
}

TEST(Swap, CasePatternIsPreserved) {
  EXPECT_EQ(Swap("He said HE was a Cowboy.", Direction::kM2F, Shipped()).output_text,
            "She said SHE was a Cowgirl.");
}

TEST(Swap, AmbiguousHerUsesNextToken) {
  const SwapResult object = Swap("I gave the book to her.", Direction::kF2M, Shipped());
  EXPECT_EQ(object.output_text, "I gave the book to him.");
  ASSERT_EQ(object.substitutions.size(), 1u);
  EXPECT_EQ(object.substitutions[0].rule, SubstitutionRule::kAmbiguousHeuristic);
  EXPECT_EQ(Swap("her dog", Direction::kF2M, Shipped()).output_text, "his dog");
}

TEST(Swap, AmbiguousHisUsesNextToken) {
  EXPECT_EQ(Swap("his dog", Direction::kM2F, Shipped()).output_text, "her dog");
  EXPECT_EQ(Swap("The dog is his.", Direction::kM2F, Shipped()).output_text, "The dog is hers.");
}

TEST(Swap, TitleWithPeriod) {
  EXPECT_EQ(Swap("Mr. Lee is here.", Direction::kM2F, Shipped()).output_text, "Mrs. Lee is here.");
}

TEST(Swap, SubstitutionLogRecordsPositions) {
  const SwapResult r = Swap("the boy and the king", Direction::kM2F, Shipped());
  ASSERT_EQ(r.substitutions.size(), 2u);
  EXPECT_EQ(r.substitutions[0].position, 1u);
  EXPECT_EQ(r.substitutions[0].original, "boy");
  EXPECT_EQ(r.substitutions[0].replacement, "girl");
  EXPECT_EQ(r.substitutions[1].position, 4u);
  EXPECT_EQ(r.substitutions[1].rule, SubstitutionRule::kExact);
}

TEST(CountGenderTerms, HandCount) {
  const GenderTermCounts c = CountGenderTerms("he and she and he", Shipped());
  EXPECT_EQ(c.male_count, 2u);
  EXPECT_EQ(c.female_count, 1u);
  EXPECT_EQ(c.total_tokens, 5u);
}

TEST(CountGenderTerms, EmptyText) {
  const GenderTermCounts c = CountGenderTerms("", Shipped());
  EXPECT_EQ(c.total_tokens, 0u);
}

// Round trip on random unambiguous text built from lexicon forms and fillers.
TEST(SwapProperty, RoundTripWithoutAmbiguousRules) {
  const auto& pairs = Shipped().pairs();
  const std::vector<std::string> fillers = {"the", "table", "went", "home", "quickly", "and", "red"};
  SeededRng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const bool male = rng.Below(2) == 0;
    std::string text;
    for (int k = 0; k < 12; ++k) {
      if (!text.empty()) text += rng.Below(4) == 0 ? ", " : " ";
      if (rng.Below(3) == 0) {
        const GenderPair& p = pairs[rng.Below(pairs.size())];
        const std::string& form = male ? p.male_form : p.female_form;
        if (Shipped().Ambiguous(form, male ? Direction::kM2F : Direction::kF2M)) continue;
        if (form.back() == '.') continue;
        text += form;
      } else {
        text += fillers[rng.Below(fillers.size())];
      }
    }
    const Direction forward = male ? Direction::kM2F : Direction::kF2M;
    const Direction back = male ? Direction::kF2M : Direction::kM2F;
    const SwapResult there = Swap(text, forward, Shipped());
    ASSERT_EQ(there.ambiguous_count, 0u) << text;
    const SwapResult home = Swap(there.output_text, back, Shipped());
    if (home.ambiguous_count == 0) {
      EXPECT_EQ(home.output_text, text);
    }
  }
}

}  // namespace
}  // namespace feedbias
