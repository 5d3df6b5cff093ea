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

#include "feedbias/report.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include "json.hpp"

#include "feedbias/common.h"
#include "feedbias/corpus.h"

namespace feedbias {
namespace {

using ojson = nlohmann::ordered_json;

const std::vector<std::string> kResultsHeader = {
    "condition", "comparison", "model_id", "metric", "t_obs_minus_mean",
    "p",         "p_display",  "d_pairs",  "z_perm", "stars"};

int ConditionRank(std::string_view condition) {
  if (condition == "implicit") return 0;
  if (condition == "explicit") return 1;
  if (condition == "baseline") return 2;
  Fail(ErrorKind::kValidation, "unknown result condition '" + std::string(condition) + "'");
}

std::string CsvField(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvLine(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += CsvField(fields[i]);
  }
  return line + "\n";
}

std::string Num(double value) { return FormatSignificant(value); }

double Round(double value) { return RoundSignificant(value); }

double ParseNumber(const std::string& text, const char* column) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorKind::kValidation, std::string("results: bad number in column '") + column + "': '" +
                                   text + "'");
}

ojson RowToJson(const ResultRow& r) {
  ojson j;
  j["condition"] = r.condition;
  j["comparison"] = r.comparison;
  j["model_id"] = r.model_id;
  j["metric"] = r.metric;
  j["t_obs_minus_mean"] = r.t_obs_minus_mean;
  j["p"] = r.p;
  j["p_display"] = DisplayP(r.p);
  j["d_pairs"] = r.d_pairs;
  j["z_perm"] = r.z_perm;
  j["stars"] = r.stars;
  return j;
}

ojson RoundedArray(const std::vector<double>& values) {
  ojson out = ojson::array();
  for (const double v : values) out.push_back(Round(v));
  return out;
}

std::string OptionalNum(const std::optional<double>& v) { return v ? Num(*v) : std::string(); }

}  // namespace

std::string SignificanceStars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string DisplayP(double p) {
  if (p < 0.001) return "<.001";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", p);
  return buf;
}

std::vector<ResultRow> BuildResultsTable(
    const std::vector<std::pair<ResultLabels, PermutationResult>>& results) {
  Require(!results.empty(), "results table needs at least one result");
  std::vector<ResultRow> rows;
  rows.reserve(results.size());
  for (const auto& [labels, result] : results) {
    ConditionRank(labels.condition);
    Require(!labels.comparison.empty() && !labels.model_id.empty(),
            "result labels need a comparison and a model id");
    ResultRow row;
    row.condition = labels.condition;
    row.comparison = labels.comparison;
    row.model_id = labels.model_id;
    row.metric = std::string(MetricName(result.metric));
    row.t_obs_minus_mean = Round(result.t_obs - result.t_perm_mean);
    row.p = Round(result.p_two_tailed);
    row.d_pairs = Round(result.d_pairs);
    row.z_perm = Round(result.z_perm);
    row.stars = SignificanceStars(row.p);
    rows.push_back(std::move(row));
  }
  const auto key = [](const ResultRow& r) {
    return std::make_tuple(ConditionRank(r.condition), std::cref(r.comparison),
                           std::cref(r.model_id), std::cref(r.metric));
  };
  std::sort(rows.begin(), rows.end(),
            [&](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
  for (size_t i = 1; i < rows.size(); ++i) {
    if (key(rows[i - 1]) == key(rows[i])) {
      Fail(ErrorKind::kValidation, "duplicate result row: " + rows[i].condition + " / " +
                                       rows[i].comparison + " / " + rows[i].model_id + " / " +
                                       rows[i].metric);
    }
  }
  return rows;
}

std::string ResultsToCsv(const std::vector<ResultRow>& rows) {
  std::string out = CsvLine(kResultsHeader);
  for (const ResultRow& r : rows) {
    out += CsvLine({r.condition, r.comparison, r.model_id, r.metric, Num(r.t_obs_minus_mean),
                    Num(r.p), DisplayP(r.p), Num(r.d_pairs), Num(r.z_perm), r.stars});
  }
  return out;
}

std::vector<ResultRow> ResultsFromCsv(std::string_view csv) {
  const auto records = ParseCsv(csv);
  Require(!records.empty() && records.front() == kResultsHeader, "results CSV: unexpected header");
  std::vector<ResultRow> rows;
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    Require(f.size() == kResultsHeader.size(),
            "results CSV: wrong field count on line " + std::to_string(i + 1));
    ResultRow r;
    r.condition = f[0];
    r.comparison = f[1];
    r.model_id = f[2];
    r.metric = f[3];
    r.t_obs_minus_mean = ParseNumber(f[4], "t_obs_minus_mean");
    r.p = ParseNumber(f[5], "p");
    r.d_pairs = ParseNumber(f[7], "d_pairs");
    r.z_perm = ParseNumber(f[8], "z_perm");
    r.stars = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string ResultsToJson(const std::vector<ResultRow>& rows) {
  ojson doc;
  doc["schema"] = kResultsSchema;
  doc["rows"] = ojson::array();
  for (const ResultRow& r : rows) doc["rows"].push_back(RowToJson(r));
  return doc.dump(2) + "\n";
}

std::vector<ResultRow> ResultsFromJson(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::exception& e) {
    Fail(ErrorKind::kValidation, std::string("results JSON: ") + e.what());
  }
  Require(doc.value("schema", "") == kResultsSchema, "results JSON: unexpected schema id");
  std::vector<ResultRow> rows;
  try {
    for (const ojson& j : doc.at("rows")) {
      ResultRow r;
      r.condition = j.at("condition").get<std::string>();
      r.comparison = j.at("comparison").get<std::string>();
      r.model_id = j.at("model_id").get<std::string>();
      r.metric = j.at("metric").get<std::string>();
      r.t_obs_minus_mean = j.at("t_obs_minus_mean").get<double>();
      r.p = j.at("p").get<double>();
      r.d_pairs = j.at("d_pairs").get<double>();
      r.z_perm = j.at("z_perm").get<double>();
      r.stars = j.at("stars").get<std::string>();
      rows.push_back(std::move(r));
    }
  } catch (const ojson::exception& e) {
    Fail(ErrorKind::kValidation, std::string("results JSON: ") + e.what());
  }
  return rows;
}

std::string HistogramToJson(const ResultLabels& labels, const PermutationResult& result) {
  ojson doc;
  doc["schema"] = kHistogramSchema;
  doc["condition"] = labels.condition;
  doc["comparison"] = labels.comparison;
  doc["model_id"] = labels.model_id;
  doc["metric"] = MetricName(result.metric);
  doc["n"] = result.n;
  doc["permutations"] = result.permutations;
  doc["seed"] = result.seed;
  doc["t_obs"] = Round(result.t_obs);
  doc["t_perm_mean"] = Round(result.t_perm_mean);
  doc["t_perm_sd"] = Round(result.t_perm_sd);
  doc["p"] = Round(result.p_two_tailed);
  doc["bin_edges"] = RoundedArray(result.histogram.bin_edges);
  doc["counts"] = result.histogram.counts;
  return doc.dump(2) + "\n";
}

std::string TsneToJson(const TsneResult& result) {
  ojson doc;
  doc["schema"] = kTsneSchema;
  doc["perplexity"] = Round(result.perplexity);
  doc["iterations"] = result.iterations;
  doc["seed"] = result.seed;
  doc["kl_final"] = Round(result.kl_final);
  doc["trustworthiness_k"] = result.trustworthiness_k;
  doc["trustworthiness"] = Round(result.trustworthiness);
  doc["jittered_duplicates"] = result.jittered_duplicates;
  doc["kl_history"] = ojson::array();
  for (const KlCheckpoint& c : result.kl_history) {
    doc["kl_history"].push_back({{"iteration", c.iteration}, {"kl", Round(c.kl)}});
  }
  doc["points"] = ojson::array();
  for (const TsnePoint& p : result.points) {
    ojson point;
    point["essay_id"] = p.essay_id;
    point["group"] = p.group_label;
    point["x"] = Round(p.x);
    point["y"] = Round(p.y);
    doc["points"].push_back(std::move(point));
  }
  return doc.dump(2) + "\n";
}

TsneResult TsneFromJson(std::string_view text) {
  TsneResult r;
  try {
    const ojson doc = ojson::parse(text);
    Require(doc.value("schema", "") == kTsneSchema, "t-SNE JSON: unexpected schema id");
    r.perplexity = doc.at("perplexity").get<double>();
    r.iterations = doc.at("iterations").get<int>();
    r.seed = doc.at("seed").get<uint64_t>();
    r.kl_final = doc.at("kl_final").get<double>();
    r.trustworthiness_k = doc.at("trustworthiness_k").get<int>();
    r.trustworthiness = doc.at("trustworthiness").get<double>();
    r.jittered_duplicates = doc.at("jittered_duplicates").get<size_t>();
    for (const ojson& c : doc.at("kl_history")) {
      r.kl_history.push_back({c.at("iteration").get<int>(), c.at("kl").get<double>()});
    }
    for (const ojson& p : doc.at("points")) {
      r.points.push_back({p.at("essay_id").get<std::string>(), p.at("group").get<std::string>(),
                          p.at("x").get<double>(), p.at("y").get<double>()});
    }
  } catch (const ojson::exception& e) {
    Fail(ErrorKind::kValidation, std::string("t-SNE JSON: ") + e.what());
  }
  return r;
}

std::string TextStatsRecordsToCsv(const std::vector<TextStatsRecord>& records) {
  std::vector<std::string> header = {"essay_id", "group", "total_tokens", "sentence_count"};
  for (const std::string& m : TextStatsMeasures()) header.push_back(m);
  header.push_back("concreteness_coverage");
  header.push_back("supportive_count");
  header.push_back("controlling_count");
  std::string out = CsvLine(header);
  for (const TextStatsRecord& r : records) {
    std::vector<std::string> fields = {r.essay_id, r.group_label, std::to_string(r.total_tokens),
                                       std::to_string(r.sentence_count)};
    for (const std::string& m : TextStatsMeasures()) fields.push_back(OptionalNum(MeasureValue(r, m)));
    fields.push_back(Num(r.concreteness_coverage));
    fields.push_back(std::to_string(r.supportive_count));
    fields.push_back(std::to_string(r.controlling_count));
    out += CsvLine(fields);
  }
  return out;
}

std::string GroupSummariesToCsv(const std::vector<GroupSummary>& groups) {
  std::string out = CsvLine({"group", "records", "measure", "count", "mean", "sd"});
  for (const GroupSummary& g : groups) {
    for (const MeasureSummary& m : g.measures) {
      out += CsvLine({g.group_label, std::to_string(g.records), m.measure, std::to_string(m.count),
                      OptionalNum(m.mean), OptionalNum(m.sd)});
    }
  }
  return out;
}

std::string GroupSummariesToJson(const std::vector<GroupSummary>& groups) {
  ojson doc;
  doc["schema"] = kTextStatsSchema;
  doc["groups"] = ojson::array();
  for (const GroupSummary& g : groups) {
    ojson group;
    group["group"] = g.group_label;
    group["records"] = g.records;
    ojson measures = ojson::object();
    for (const MeasureSummary& m : g.measures) {
      ojson entry;
      entry["count"] = m.count;
      entry["mean"] = m.mean ? ojson(Round(*m.mean)) : ojson(nullptr);
      entry["sd"] = m.sd ? ojson(Round(*m.sd)) : ojson(nullptr);
      measures[m.measure] = std::move(entry);
    }
    group["measures"] = std::move(measures);
    doc["groups"].push_back(std::move(group));
  }
  return doc.dump(2) + "\n";
}

void Emit(const std::string& path, std::string_view contents) { WriteFile(path, contents); }

}  // namespace feedbias
