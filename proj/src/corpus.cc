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

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "feedbias/rng.h"
#include "feedbias/text.h"

namespace feedbias {
namespace {

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return IsSpaceByte(static_cast<unsigned char>(c)); });
}

}  // namespace

std::vector<std::vector<std::string>> ParseCsv(std::string_view contents) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t i = 0;
  // Skip a UTF-8 BOM.
  if (contents.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  const auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  const auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (; i < contents.size(); ++i) {
    const char c = contents[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < contents.size() && contents[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (i + 1 < contents.size() && contents[i + 1] == '\n') continue;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) Fail(ErrorKind::kValidation, "CSV ends inside a quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

IngestResult IngestEssaysFromString(std::string_view csv, const ColumnMapping& mapping) {
  const auto rows = ParseCsv(csv);
  Require(!rows.empty(), "CSV has no header row");
  const auto& header = rows.front();
  const auto column = [&](const std::string& name) -> std::optional<size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<size_t>(it - header.begin());
  };
  const auto id_col = column(mapping.id_column);
  const auto text_col = column(mapping.text_column);
  Require(id_col.has_value(), "missing mapped id column '" + mapping.id_column + "'");
  Require(text_col.has_value(), "missing mapped text column '" + mapping.text_column + "'");
  std::optional<size_t> topic_col;
  if (!mapping.topic_column.empty()) {
    topic_col = column(mapping.topic_column);
    Require(topic_col.has_value(), "missing mapped topic column '" + mapping.topic_column + "'");
  }

  IngestResult result;
  std::unordered_set<std::string> seen;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto cell = [&](size_t col) -> std::string {
      return col < row.size() ? row[col] : std::string();
    };
    Essay essay{cell(*id_col), cell(*text_col), std::nullopt};
    if (IsBlank(essay.text)) {
      ++result.skipped_empty;
      continue;
    }
    Require(!essay.essay_id.empty(), "row " + std::to_string(r + 1) + " has an empty essay id");
    Require(seen.insert(essay.essay_id).second, "duplicate essay id '" + essay.essay_id + "'");
    if (topic_col) essay.prompt_topic = cell(*topic_col);
    result.essays.push_back(std::move(essay));
  }
  Require(!result.essays.empty(), "CSV has zero usable rows");
  return result;
}

IngestResult IngestEssays(const std::string& path, const ColumnMapping& mapping) {
  return IngestEssaysFromString(ReadFile(path), mapping);
}

std::string_view ExclusionReasonName(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kNoGenderedTerms:
      return "no-gendered-terms";
    case ExclusionReason::kTie:
      return "tie";
    case ExclusionReason::kBelowThreshold:
      return "below-threshold";
  }
  return "unknown";
}

ScreenedCorpus ScreenAndClassify(const std::vector<Essay>& essays,
                                 const GenderLexicon& lexicon,
                                 const ScreeningConfig& config) {
  Require(config.per_group_cap >= 1, "per_group_cap must be >= 1");
  ScreenedCorpus corpus;

  std::vector<size_t> order(essays.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (config.selection == Selection::kSeededSample) {
    SeededRng rng(config.seed, /*stream=*/0x5c4ee9);
    rng.Shuffle(std::span<size_t>(order));
  }

  struct Candidate {
    size_t index;
    GenderTermCounts counts;
  };
  std::vector<Candidate> male, female;
  for (const size_t index : order) {
    const Essay& essay = essays[index];
    const GenderTermCounts counts = CountGenderTerms(essay.text, lexicon);
    if (counts.male_count == 0 && counts.female_count == 0) {
      corpus.excluded.push_back({essay, ExclusionReason::kNoGenderedTerms});
    } else if (counts.total_tokens < config.min_tokens) {
      corpus.excluded.push_back({essay, ExclusionReason::kBelowThreshold});
    } else if (counts.male_count == counts.female_count) {
      corpus.excluded.push_back({essay, ExclusionReason::kTie});
    } else if (counts.male_count > counts.female_count) {
      if (config.require_exclusive && counts.female_count > 0) {
        corpus.excluded.push_back({essay, ExclusionReason::kBelowThreshold});
      } else {
        male.push_back({index, counts});
      }
    } else {
      if (config.require_exclusive && counts.male_count > 0) {
        corpus.excluded.push_back({essay, ExclusionReason::kBelowThreshold});
      } else {
        female.push_back({index, counts});
      }
    }
  }

  size_t gendered = 0, total = 0;
  const auto retain = [&](const std::vector<Candidate>& candidates, std::vector<Essay>& group,
                          const char* label) {
    for (size_t k = 0; k < candidates.size() && k < config.per_group_cap; ++k) {
      group.push_back(essays[candidates[k].index]);
      gendered += candidates[k].counts.male_count + candidates[k].counts.female_count;
      total += candidates[k].counts.total_tokens;
    }
    if (candidates.size() < config.per_group_cap) {
      corpus.warnings.push_back(std::string("group ") + label + " has " +
                                std::to_string(candidates.size()) +
                                " qualifying essays, fewer than the cap of " +
                                std::to_string(config.per_group_cap));
    }
  };
  retain(male, corpus.group_m, "M");
  retain(female, corpus.group_f, "F");
  corpus.gendered_word_ratio =
      total == 0 ? 0.0 : static_cast<double>(gendered) / static_cast<double>(total);
  return corpus;
}

std::vector<CounterfactualPair> BuildPairs(const ScreenedCorpus& corpus,
                                           const GenderLexicon& lexicon) {
  Require(!corpus.group_m.empty() || !corpus.group_f.empty(),
          "screened corpus has no essays to pair");
  std::vector<CounterfactualPair> pairs;
  pairs.reserve(corpus.group_m.size() + corpus.group_f.size());
  const auto build = [&](const std::vector<Essay>& group, Direction direction) {
    for (const Essay& essay : group) {
      SwapResult swap = Swap(essay.text, direction, lexicon);
      if (swap.substitutions.empty()) {
        Fail(ErrorKind::kInternal, "essay '" + essay.essay_id +
                                       "' produced zero substitutions; screening and "
                                       "lexicon disagree");
      }
      std::string text = swap.output_text;
      pairs.push_back({essay, std::move(text), direction, std::move(swap)});
    }
  };
  build(corpus.group_m, Direction::kM2F);
  build(corpus.group_f, Direction::kF2M);
  return pairs;
}

}  // namespace feedbias
