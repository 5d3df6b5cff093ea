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

#ifndef FEEDBIAS_REPORT_H_
#define FEEDBIAS_REPORT_H_

#include <string>
#include <string_view>
#include <vector>

#include "feedbias/permutation.h"
#include "feedbias/textstats.h"
#include "feedbias/tsne.h"

namespace feedbias {

inline constexpr std::string_view kResultsSchema = "feedbias.results/v1";
inline constexpr std::string_view kHistogramSchema = "feedbias.histogram/v1";
inline constexpr std::string_view kTsneSchema = "feedbias.tsne/v1";
inline constexpr std::string_view kTextStatsSchema = "feedbias.textstats/v1";

// "implicit", "explicit" or "baseline".
struct ResultLabels {
  std::string condition;
  std::string comparison;  // e.g. "M vs M-F"
  std::string model_id;
};

struct ResultRow {
  std::string condition;
  std::string comparison;
  std::string model_id;
  std::string metric;
  double t_obs_minus_mean = 0.0;
  double p = 1.0;
  double d_pairs = 0.0;
  double z_perm = 0.0;
  std::string stars;

  bool operator==(const ResultRow&) const = default;
};

// "***" for p < .001, "**" for p < .01, "*" for p < .05, else "".
std::string SignificanceStars(double p);
// "<.001" below 0.001, otherwise three decimals.
std::string DisplayP(double p);

// One row per result with values rounded to 6 significant digits, sorted by
// (condition, comparison, model, metric). Throws on an empty list, an unknown
// condition or a duplicate key.
std::vector<ResultRow> BuildResultsTable(
    const std::vector<std::pair<ResultLabels, PermutationResult>>& results);

std::string ResultsToCsv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> ResultsFromCsv(std::string_view csv);
std::string ResultsToJson(const std::vector<ResultRow>& rows);
std::vector<ResultRow> ResultsFromJson(std::string_view json);

// Plot data for one null distribution: bin edges, counts, t_obs and the null
// mean as markers, plus labels.
std::string HistogramToJson(const ResultLabels& labels, const PermutationResult& result);

std::string TsneToJson(const TsneResult& result);
TsneResult TsneFromJson(std::string_view json);

std::string TextStatsRecordsToCsv(const std::vector<TextStatsRecord>& records);
std::string GroupSummariesToCsv(const std::vector<GroupSummary>& groups);
std::string GroupSummariesToJson(const std::vector<GroupSummary>& groups);

// Writes `contents` atomically to `path`.
void Emit(const std::string& path, std::string_view contents);

}  // namespace feedbias

#endif  // FEEDBIAS_REPORT_H_
