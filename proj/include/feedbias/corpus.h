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

#ifndef FEEDBIAS_CORPUS_H_
#define FEEDBIAS_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/common.h"
#include "feedbias/lexicon.h"

namespace feedbias {

struct Essay {
  std::string essay_id;
  std::string text;
  std::optional<std::string> prompt_topic;

  bool operator==(const Essay&) const = default;
};

// RFC 4180 CSV: quoted fields may contain commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> ParseCsv(std::string_view contents);

struct ColumnMapping {
  std::string id_column = "essay_id";
  std::string text_column = "full_text";
  std::string topic_column;  // empty: no topic
};

struct IngestResult {
  std::vector<Essay> essays;
  size_t skipped_empty = 0;
};

IngestResult IngestEssays(const std::string& path, const ColumnMapping& mapping);
IngestResult IngestEssaysFromString(std::string_view csv, const ColumnMapping& mapping);

enum class ExclusionReason { kNoGenderedTerms, kTie, kBelowThreshold };

std::string_view ExclusionReasonName(ExclusionReason reason);

struct Exclusion {
  Essay essay;
  ExclusionReason reason;
};

enum class Selection { kCorpusOrder, kSeededSample };

struct ScreeningConfig {
  size_t per_group_cap = 300;
  bool require_exclusive = false;
  size_t min_tokens = 20;
  Selection selection = Selection::kCorpusOrder;
  uint64_t seed = 0;  // used by kSeededSample
};

struct ScreenedCorpus {
  std::vector<Essay> group_m;
  std::vector<Essay> group_f;
  std::vector<Exclusion> excluded;
  double gendered_word_ratio = 0.0;
  std::vector<std::string> warnings;
};

ScreenedCorpus ScreenAndClassify(const std::vector<Essay>& essays,
                                 const GenderLexicon& lexicon,
                                 const ScreeningConfig& config);

struct CounterfactualPair {
  Essay source;
  std::string counterfactual_text;
  Direction direction = Direction::kM2F;
  SwapResult substitution_log;
};

// M2F for group_m, F2M for group_f, in group order (M first).
std::vector<CounterfactualPair> BuildPairs(const ScreenedCorpus& corpus,
                                           const GenderLexicon& lexicon);

}  // namespace feedbias

#endif  // FEEDBIAS_CORPUS_H_
