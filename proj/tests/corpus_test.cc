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

#include "feedbias/corpus.h"

#include <gtest/gtest.h>

#include "support.h"

namespace feedbias {
namespace {

const GenderLexicon& Shipped() {
  static const GenderLexicon lexicon = LoadLexicon(testing::SourcePath("resources/gender_pairs.tsv"));
  return lexicon;
}

std::vector<Essay> Essays(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<Essay> out;
  for (const auto& [id, text] : items) out.push_back({id, text, std::nullopt});
  return out;
}

TEST(ParseCsv, QuotedFieldsAndBom) {
  const auto rows = ParseCsv("\xEF\xBB\xBF" "a,b\n1,\"x, \"\"y\"\"\nz\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "a");
  EXPECT_EQ(rows[1][1], "x, \"y\"\nz");
}

TEST(Ingest, ReadsMappedColumns) {
  const IngestResult r = IngestEssaysFromString("id,text,topic\n1,hello there,A\n2,,B\n",
                                                {"id", "text", "topic"});
  ASSERT_EQ(r.essays.size(), 1u);
  EXPECT_EQ(r.essays[0].essay_id, "1");
  EXPECT_EQ(r.essays[0].prompt_topic.value_or(""), "A");
  EXPECT_EQ(r.skipped_empty, 1u);
}

TEST(Ingest, MissingColumnIsAnError) {
  EXPECT_THROW(IngestEssaysFromString("id,body\n1,x\n", {"id", "text", ""}), Error);
}

TEST(Ingest, DuplicateIdIsAnError) {
  EXPECT_THROW(IngestEssaysFromString("essay_id,full_text\n1,a\n1,b\n", {}), Error);
}

TEST(Ingest, NoUsableRowsIsAnError) {
  EXPECT_THROW(IngestEssaysFromString("essay_id,full_text\n1,\n", {}), Error);
}

TEST(Screen, ClassifiesByMajority) {
  ScreeningConfig config;
  config.per_group_cap = 10;
  config.min_tokens = 0;
  const ScreenedCorpus c =
      ScreenAndClassify(Essays({{"a", "he he"}, {"b", "she"}, {"c", "table"}}), Shipped(), config);
  ASSERT_EQ(c.group_m.size(), 1u);
  ASSERT_EQ(c.group_f.size(), 1u);
  ASSERT_EQ(c.excluded.size(), 1u);
  EXPECT_EQ(c.group_m[0].essay_id, "a");
  EXPECT_EQ(c.group_f[0].essay_id, "b");
  EXPECT_EQ(c.excluded[0].reason, ExclusionReason::kNoGenderedTerms);
  EXPECT_EQ(ExclusionReasonName(c.excluded[0].reason), "no-gendered-terms");
}

TEST(Screen, TieIsExcluded) {
  ScreeningConfig config;
  config.min_tokens = 0;
  const ScreenedCorpus c = ScreenAndClassify(Essays({{"t", "he she"}}), Shipped(), config);
  ASSERT_EQ(c.excluded.size(), 1u);
  EXPECT_EQ(c.excluded[0].reason, ExclusionReason::kTie);
}

TEST(Screen, ShortEssayIsBelowThreshold) {
  ScreeningConfig config;
  config.min_tokens = 20;
  const ScreenedCorpus c = ScreenAndClassify(Essays({{"s", "he ran home"}}), Shipped(), config);
  ASSERT_EQ(c.excluded.size(), 1u);
  EXPECT_EQ(c.excluded[0].reason, ExclusionReason::kBelowThreshold);
}

TEST(Screen, RequireExclusiveDropsMixedEssays) {
  ScreeningConfig config;
  config.min_tokens = 0;
  config.require_exclusive = true;
  const ScreenedCorpus c = ScreenAndClassify(Essays({{"x", "he he she"}}), Shipped(), config);
  EXPECT_TRUE(c.group_m.empty());
  EXPECT_EQ(c.excluded.size(), 1u);
}

TEST(Screen, CapKeepsCorpusOrderAndWarnsWhenShort) {
  ScreeningConfig config;
  config.min_tokens = 0;
  config.per_group_cap = 2;
  const ScreenedCorpus c = ScreenAndClassify(
      Essays({{"1", "he"}, {"2", "him"}, {"3", "his"}, {"4", "she"}}), Shipped(), config);
  ASSERT_EQ(c.group_m.size(), 2u);
  EXPECT_EQ(c.group_m[0].essay_id, "1");
  EXPECT_EQ(c.group_m[1].essay_id, "2");
  EXPECT_EQ(c.group_f.size(), 1u);
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("group F"), std::string::npos);
}

TEST(Screen, SeededSampleIsDeterministic) {
  ScreeningConfig config;
  config.min_tokens = 0;
  config.per_group_cap = 3;
  config.selection = Selection::kSeededSample;
  config.seed = 5;
  std::vector<Essay> essays;
  for (int i = 0; i < 20; ++i) essays.push_back({"e" + std::to_string(i), "he", std::nullopt});
  const ScreenedCorpus a = ScreenAndClassify(essays, Shipped(), config);
  const ScreenedCorpus b = ScreenAndClassify(essays, Shipped(), config);
  ASSERT_EQ(a.group_m.size(), 3u);
  for (size_t i = 0; i < 3; ++i) EXPECT_EQ(a.group_m[i].essay_id, b.group_m[i].essay_id);
}

TEST(Screen, GenderedWordRatio) {
  ScreeningConfig config;
  config.min_tokens = 0;
  const ScreenedCorpus c =
      ScreenAndClassify(Essays({{"a", "he ran"}, {"b", "she sat down"}}), Shipped(), config);
  EXPECT_DOUBLE_EQ(c.gendered_word_ratio, 2.0 / 5.0);
}

TEST(BuildPairs, DirectionsFollowGroups) {
  ScreeningConfig config;
  config.min_tokens = 0;
  const ScreenedCorpus c =
      ScreenAndClassify(Essays({{"a", "he ran"}, {"b", "the queen sat"}}), Shipped(), config);
  const auto pairs = BuildPairs(c, Shipped());
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].direction, Direction::kM2F);
  EXPECT_EQ(pairs[0].counterfactual_text, "she ran");
  EXPECT_EQ(pairs[1].direction, Direction::kF2M);
  EXPECT_EQ(pairs[1].counterfactual_text, "the king sat");
}

TEST(BuildPairs, EmptyCorpusIsAnError) {
  EXPECT_THROW(BuildPairs(ScreenedCorpus{}, Shipped()), Error);
}

TEST(Corpus, FixtureEssaysAllPair) {
  const IngestResult r = IngestEssays(testing::SourcePath("resources/fixtures/essays.csv"),
                                      {"essay_id", "full_text", "prompt_name"});
  const ScreenedCorpus c = ScreenAndClassify(r.essays, Shipped(), ScreeningConfig{});
  EXPECT_EQ(c.group_m.size(), 3u);
  EXPECT_EQ(c.group_f.size(), 3u);
  EXPECT_EQ(BuildPairs(c, Shipped()).size(), 6u);
}

}  // namespace
}  // namespace feedbias
