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

#include "feedbias/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <set>

#include "json.hpp"

#include "feedbias/common.h"
#include "feedbias/permutation.h"
#include "feedbias/report.h"
#include "feedbias/rng.h"
#include "feedbias/text.h"
#include "feedbias/textstats.h"

namespace feedbias {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kManifestSchema = "feedbias.manifest/v1";

ojson ParseJsonFile(const std::string& path) {
  try {
    return ojson::parse(ReadFile(path));
  } catch (const ojson::exception& e) {
    Fail(ErrorKind::kValidation, path + ": " + e.what());
  }
}

std::vector<ojson> ParseJsonLines(const std::string& path) {
  std::vector<ojson> out;
  const std::string content = ReadFile(path);
  size_t pos = 0;
  while (pos < content.size()) {
    const size_t nl = std::min(content.find('\n', pos), content.size());
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(ojson::parse(line));
    } catch (const ojson::exception& e) {
      Fail(ErrorKind::kValidation, path + ": " + e.what());
    }
  }
  return out;
}

ojson EssayToJson(const Essay& e) {
  ojson j;
  j["essay_id"] = e.essay_id;
  j["text"] = e.text;
  if (e.prompt_topic) j["prompt_topic"] = *e.prompt_topic;
  return j;
}

Essay EssayFromJson(const ojson& j) {
  Essay e;
  e.essay_id = j.at("essay_id").get<std::string>();
  e.text = j.at("text").get<std::string>();
  if (j.contains("prompt_topic")) e.prompt_topic = j.at("prompt_topic").get<std::string>();
  return e;
}

std::string_view VariantName(TextVariant v) {
  return v == TextVariant::kCounterfactual ? "counterfactual" : "original";
}

std::string SafeName(std::string_view s) {
  std::string out;
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (IsAsciiAlpha(u) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.') {
      out += c;
    } else if (c == '\'') {
      out += "prime";
    } else {
      out += '_';
    }
  }
  return out;
}

std::string Relative(const std::string& path, const std::string& base) {
  return fs::path(path).lexically_relative(base).generic_string();
}

// Subsets two groups to their shared essay ids (both stay sorted).
std::pair<GroupEmbeddings, GroupEmbeddings> AlignOnSharedIds(const GroupEmbeddings& x,
                                                             const GroupEmbeddings& y) {
  std::vector<Eigen::Index> xi, yi;
  size_t a = 0, b = 0;
  while (a < x.essay_ids.size() && b < y.essay_ids.size()) {
    if (x.essay_ids[a] == y.essay_ids[b]) {
      xi.push_back(static_cast<Eigen::Index>(a++));
      yi.push_back(static_cast<Eigen::Index>(b++));
    } else if (x.essay_ids[a] < y.essay_ids[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  const auto take = [](const GroupEmbeddings& g, const std::vector<Eigen::Index>& rows) {
    GroupEmbeddings out;
    out.group_label = g.group_label;
    out.vectors.resize(static_cast<Eigen::Index>(rows.size()), g.dim());
    for (size_t k = 0; k < rows.size(); ++k) {
      out.essay_ids.push_back(g.essay_ids[static_cast<size_t>(rows[k])]);
      out.vectors.row(static_cast<Eigen::Index>(k)) = g.vectors.row(rows[k]);
    }
    return out;
  };
  return {take(x, xi), take(y, yi)};
}

std::unique_ptr<Embedder> MakeEmbedder(const ExperimentConfig& config) {
  if (config.mock.enabled) return std::make_unique<MockEmbedder>(config.mock.embedding_dim);
  return std::make_unique<HttpEmbedder>(config.embedding);
}

std::vector<FeedbackRecord> LoadResponses(const std::string& path) {
  std::vector<FeedbackRecord> records;
  const std::string content = ReadFile(path);
  size_t pos = 0;
  while (pos < content.size()) {
    const size_t nl = std::min(content.find('\n', pos), content.size());
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (!line.empty()) records.push_back(FeedbackRecordFromJson(line));
  }
  return records;
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kScreen:
      return "screen";
    case Stage::kCounterfact:
      return "counterfact";
    case Stage::kPlan:
      return "plan";
    case Stage::kGenerate:
      return "generate";
    case Stage::kEmbed:
      return "embed";
    case Stage::kStats:
      return "stats";
    case Stage::kTsne:
      return "tsne";
    case Stage::kTextstats:
      return "textstats";
    case Stage::kReport:
      return "report";
  }
  return "screen";
}

Stage ParseStage(std::string_view name) {
  for (const Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  Fail(ErrorKind::kValidation, "unknown stage '" + std::string(name) + "'");
}

std::string ComparisonSpec::Label() const {
  return std::string(GroupLabel(x)) + " vs " + std::string(GroupLabel(y));
}

const std::vector<ComparisonSpec>& DefaultComparisons() {
  static const std::vector<ComparisonSpec> specs = {
      {"implicit", Condition::kImplicitOriginalM, Condition::kImplicitCounterfactualMF},
      {"implicit", Condition::kImplicitOriginalF, Condition::kImplicitCounterfactualFM},
      {"explicit", Condition::kExplicitM, Condition::kExplicitF},
      {"explicit", Condition::kExplicitM, Condition::kExplicitN},
      {"explicit", Condition::kExplicitF, Condition::kExplicitN},
      {"baseline", Condition::kImplicitOriginalM, Condition::kBaselineMPrime},
  };
  return specs;
}

Pipeline::Pipeline(ExperimentConfig config) : config_(std::move(config)) {
  config_.Validate();
  config_hash_ = ConfigHash(config_);
  run_dir_ = (fs::path(config_.run_root) / (config_hash_ + "-s" + std::to_string(config_.seed)))
                 .lexically_normal()
                 .string();
}

std::string Pipeline::StagePath(Stage stage, std::string_view name) const {
  return (fs::path(run_dir_) / std::string(StageName(stage)) / std::string(name)).string();
}

std::string Pipeline::ManifestPath(Stage stage) const { return StagePath(stage, "manifest.json"); }

void Pipeline::RequireManifest(Stage producer) const {
  const std::string path = ManifestPath(producer);
  if (!fs::exists(path)) {
    Fail(ErrorKind::kValidation, "missing artifact " + path + " (produced by stage '" +
                                     std::string(StageName(producer)) + "'; run it first)");
  }
  const ojson manifest = ParseJsonFile(path);
  Require(manifest.value("config_hash", "") == config_hash_,
          path + " was written for a different config");
}

StageResult Pipeline::Run(Stage stage) {
  switch (stage) {
    case Stage::kScreen:
      return Screen();
    case Stage::kCounterfact:
      return Counterfact();
    case Stage::kPlan:
      return Plan();
    case Stage::kGenerate:
      return Generate();
    case Stage::kEmbed:
      return Embed();
    case Stage::kStats:
      return Stats();
    case Stage::kTsne:
      return Tsne();
    case Stage::kTextstats:
      return Textstats();
    case Stage::kReport:
      return Report();
  }
  Fail(ErrorKind::kInternal, "unhandled stage");
}

std::vector<StageResult> Pipeline::RunAll() {
  std::vector<StageResult> results;
  for (const Stage s : kAllStages) {
    if (s == Stage::kTextstats && config_.textstats.academic_words.empty()) continue;
    results.push_back(Run(s));
    if (results.back().exit_code != kExitOk) break;
  }
  return results;
}

namespace {

// Manifest skeleton shared by all stages.
ojson NewManifest(Stage stage, const std::string& hash, const ExperimentConfig& config) {
  ojson m;
  m["schema"] = kManifestSchema;
  m["stage"] = StageName(stage);
  m["config_hash"] = hash;
  m["seed"] = config.seed;
  m["config"] = ojson::parse(ConfigToJson(config));
  return m;
}

StageResult Finish(Stage stage, const std::string& path, ojson& manifest, int exit_code,
                   std::string summary) {
  manifest["exit_code"] = exit_code;
  WriteFile(path, manifest.dump(2) + "\n");
  return {stage, exit_code, path, std::move(summary)};
}

}  // namespace

StageResult Pipeline::Screen() {
  const GenderLexicon lexicon = LoadLexicon(config_.lexicon_path);
  const IngestResult ingest = IngestEssays(config_.corpus.path, config_.corpus.columns);
  const ScreenedCorpus corpus = ScreenAndClassify(ingest.essays, lexicon, config_.corpus.screening);

  ojson out;
  out["group_m"] = ojson::array();
  for (const Essay& e : corpus.group_m) out["group_m"].push_back(EssayToJson(e));
  out["group_f"] = ojson::array();
  for (const Essay& e : corpus.group_f) out["group_f"].push_back(EssayToJson(e));
  out["excluded"] = ojson::array();
  for (const Exclusion& x : corpus.excluded) {
    out["excluded"].push_back({{"essay_id", x.essay.essay_id}, {"reason", ExclusionReasonName(x.reason)}});
  }
  out["gendered_word_ratio"] = corpus.gendered_word_ratio;
  out["warnings"] = corpus.warnings;
  const std::string data_path = StagePath(Stage::kScreen, "screened.json");
  WriteFile(data_path, out.dump(2) + "\n");

  ojson m = NewManifest(Stage::kScreen, config_hash_, config_);
  m["inputs"] = {{"corpus", config_.corpus.path}, {"lexicon", config_.lexicon_path}};
  m["outputs"] = {Relative(data_path, run_dir_)};
  m["counts"] = {{"ingested", ingest.essays.size()},
                 {"skipped_empty", ingest.skipped_empty},
                 {"group_m", corpus.group_m.size()},
                 {"group_f", corpus.group_f.size()},
                 {"excluded", corpus.excluded.size()}};
  m["warnings"] = corpus.warnings;
  char summary[160];
  std::snprintf(summary, sizeof(summary), "screen: %zu M, %zu F, %zu excluded",
                corpus.group_m.size(), corpus.group_f.size(), corpus.excluded.size());
  return Finish(Stage::kScreen, ManifestPath(Stage::kScreen), m, kExitOk, summary);
}

namespace {

ScreenedCorpus LoadScreened(const std::string& path) {
  const ojson doc = ParseJsonFile(path);
  ScreenedCorpus c;
  for (const ojson& e : doc.at("group_m")) c.group_m.push_back(EssayFromJson(e));
  for (const ojson& e : doc.at("group_f")) c.group_f.push_back(EssayFromJson(e));
  c.gendered_word_ratio = doc.at("gendered_word_ratio").get<double>();
  return c;
}

}  // namespace

StageResult Pipeline::Counterfact() {
  RequireManifest(Stage::kScreen);
  const GenderLexicon lexicon = LoadLexicon(config_.lexicon_path);
  const ScreenedCorpus corpus = LoadScreened(StagePath(Stage::kScreen, "screened.json"));
  const std::vector<CounterfactualPair> pairs = BuildPairs(corpus, lexicon);

  std::string lines;
  size_t substitutions = 0, ambiguous = 0;
  for (const CounterfactualPair& p : pairs) {
    ojson j;
    j["essay_id"] = p.source.essay_id;
    j["direction"] = DirectionName(p.direction);
    j["counterfactual_text"] = p.counterfactual_text;
    j["ambiguous_count"] = p.substitution_log.ambiguous_count;
    j["substitutions"] = ojson::array();
    for (const Substitution& s : p.substitution_log.substitutions) {
      j["substitutions"].push_back({{"position", s.position},
                                    {"original", s.original},
                                    {"replacement", s.replacement},
                                    {"rule", SubstitutionRuleName(s.rule)}});
    }
    substitutions += p.substitution_log.substitutions.size();
    ambiguous += p.substitution_log.ambiguous_count;
    lines += j.dump() + "\n";
  }
  const std::string data_path = StagePath(Stage::kCounterfact, "pairs.jsonl");
  WriteFile(data_path, lines);

  ojson m = NewManifest(Stage::kCounterfact, config_hash_, config_);
  m["inputs"] = {{"screen", Relative(ManifestPath(Stage::kScreen), run_dir_)}};
  m["outputs"] = {Relative(data_path, run_dir_)};
  m["counts"] = {{"pairs", pairs.size()}, {"substitutions", substitutions}, {"ambiguous", ambiguous}};
  return Finish(Stage::kCounterfact, ManifestPath(Stage::kCounterfact), m, kExitOk,
                "counterfact: " + std::to_string(pairs.size()) + " pairs, " +
                    std::to_string(ambiguous) + " ambiguous substitutions");
}

StageResult Pipeline::Plan() {
  RequireManifest(Stage::kCounterfact);
  const ScreenedCorpus corpus = LoadScreened(StagePath(Stage::kScreen, "screened.json"));
  std::map<std::string, Essay> by_id;
  for (const Essay& e : corpus.group_m) by_id[e.essay_id] = e;
  for (const Essay& e : corpus.group_f) by_id[e.essay_id] = e;
  std::vector<CounterfactualPair> pairs;
  for (const ojson& j : ParseJsonLines(StagePath(Stage::kCounterfact, "pairs.jsonl"))) {
    CounterfactualPair p;
    const std::string id = j.at("essay_id").get<std::string>();
    Require(by_id.count(id) > 0, "pairs.jsonl references unknown essay '" + id + "'");
    p.source = by_id.at(id);
    p.direction = ParseDirection(j.at("direction").get<std::string>());
    p.counterfactual_text = j.at("counterfactual_text").get<std::string>();
    pairs.push_back(std::move(p));
  }
  const TemplateSet templates = config_.templates_path.empty()
                                    ? TemplateSet::Default()
                                    : LoadTemplateSet(config_.templates_path);
  const std::vector<PromptJob> jobs = PlanExperiment(corpus, pairs, config_.ModelIds(), templates);

  std::string lines;
  std::map<std::string, size_t> per_condition;
  for (const PromptJob& job : jobs) {
    ojson j;
    j["job_id"] = job.job_id;
    j["essay_id"] = job.essay_id;
    j["condition"] = ConditionName(job.condition);
    j["model_id"] = job.model_id;
    j["text_variant"] = VariantName(job.text_variant);
    j["rendered_prompt"] = job.rendered_prompt;
    lines += j.dump() + "\n";
    ++per_condition[std::string(ConditionName(job.condition))];
  }
  const std::string data_path = StagePath(Stage::kPlan, "jobs.jsonl");
  WriteFile(data_path, lines);

  ojson m = NewManifest(Stage::kPlan, config_hash_, config_);
  m["inputs"] = {{"counterfact", Relative(ManifestPath(Stage::kCounterfact), run_dir_)}};
  m["outputs"] = {Relative(data_path, run_dir_)};
  m["template_version"] = templates.version;
  m["counts"] = {{"jobs", jobs.size()}, {"per_condition", per_condition}};
  return Finish(Stage::kPlan, ManifestPath(Stage::kPlan), m, kExitOk,
                "plan: " + std::to_string(jobs.size()) + " jobs");
}

StageResult Pipeline::Generate() {
  RequireManifest(Stage::kPlan);
  std::vector<PromptJob> jobs;
  for (const ojson& j : ParseJsonLines(StagePath(Stage::kPlan, "jobs.jsonl"))) {
    PromptJob job;
    job.job_id = j.at("job_id").get<std::string>();
    job.essay_id = j.at("essay_id").get<std::string>();
    job.condition = ParseCondition(j.at("condition").get<std::string>());
    job.model_id = j.at("model_id").get<std::string>();
    job.text_variant = j.at("text_variant").get<std::string>() == "counterfactual"
                           ? TextVariant::kCounterfactual
                           : TextVariant::kOriginal;
    job.rendered_prompt = j.at("rendered_prompt").get<std::string>();
    jobs.push_back(std::move(job));
  }

  GenderLexicon lexicon;
  std::vector<std::unique_ptr<CompletionBackend>> owned;
  BackendMap backends;
  if (config_.mock.enabled) {
    lexicon = LoadLexicon(config_.lexicon_path);
    owned.push_back(std::make_unique<MockChatBackend>(config_.mock.mode, config_.seed, lexicon));
    for (const ModelSettings& model : config_.models) backends[model.id] = owned.back().get();
  } else {
    for (const ModelSettings& model : config_.models) {
      owned.push_back(std::make_unique<HttpChatBackend>(model.endpoint));
      backends[model.id] = owned.back().get();
    }
  }
  ResponseCache cache(StagePath(Stage::kGenerate, "cache"));
  const BatchResult batch = RunBatch(jobs, backends, cache, config_.parallelism);

  std::string lines;
  for (const FeedbackRecord& r : batch.records) lines += FeedbackRecordToJsonLine(r) + "\n";
  const std::string data_path = StagePath(Stage::kGenerate, "responses.jsonl");
  WriteFile(data_path, lines);

  ojson m = NewManifest(Stage::kGenerate, config_hash_, config_);
  m["inputs"] = {{"plan", Relative(ManifestPath(Stage::kPlan), run_dir_)}};
  m["outputs"] = {Relative(data_path, run_dir_)};
  m["counts"] = {{"jobs", jobs.size()},
                 {"records", batch.records.size()},
                 {"backend_calls", batch.backend_calls},
                 {"cache_hits", batch.cache_hits},
                 {"failed", batch.failed_job_ids.size()}};
  m["failures"] = ojson::array();
  for (size_t i = 0; i < batch.failed_job_ids.size(); ++i) {
    m["failures"].push_back({{"job_id", batch.failed_job_ids[i]},
                             {"message", batch.failure_messages[i]}});
  }
  const int code = batch.ok() ? kExitOk : kExitPartialBatch;
  return Finish(Stage::kGenerate, ManifestPath(Stage::kGenerate), m, code,
                "generate: " + std::to_string(batch.records.size()) + "/" +
                    std::to_string(jobs.size()) + " records, " +
                    std::to_string(batch.backend_calls) + " backend calls, " +
                    std::to_string(batch.cache_hits) + " cache hits, " +
                    std::to_string(batch.failed_job_ids.size()) + " failed");
}

StageResult Pipeline::Embed() {
  RequireManifest(Stage::kGenerate);
  const std::vector<FeedbackRecord> records =
      LoadResponses(StagePath(Stage::kGenerate, "responses.jsonl"));
  std::map<std::pair<std::string, int>, std::vector<FeedbackRecord>> groups;
  for (const FeedbackRecord& r : records) {
    groups[{r.model_id, static_cast<int>(r.condition)}].push_back(r);
  }
  const std::unique_ptr<Embedder> embedder = MakeEmbedder(config_);
  EmbeddingCache cache(StagePath(Stage::kEmbed, "cache"));
  EmbedStats stats;
  ojson listed = ojson::array();
  for (const auto& [key, members] : groups) {
    const GroupEmbeddings group = EmbedGroup(members, *embedder, cache, &stats);
    const std::string stem = StagePath(
        Stage::kEmbed, SafeName(key.first) + "/" +
                           SafeName(ConditionName(static_cast<Condition>(key.second))));
    SaveGroup(group, stem);
    listed.push_back({{"model_id", key.first},
                      {"condition", ConditionName(static_cast<Condition>(key.second))},
                      {"group_label", group.group_label},
                      {"n", group.size()},
                      {"dim", group.dim()},
                      {"path_stem", Relative(stem, run_dir_)}});
  }
  ojson m = NewManifest(Stage::kEmbed, config_hash_, config_);
  m["inputs"] = {{"generate", Relative(ManifestPath(Stage::kGenerate), run_dir_)}};
  m["embedding_model"] = embedder->ModelId();
  m["groups"] = listed;
  m["counts"] = {{"groups", listed.size()},
                 {"embed_calls", stats.embed_calls},
                 {"cache_hits", stats.cache_hits}};
  return Finish(Stage::kEmbed, ManifestPath(Stage::kEmbed), m, kExitOk,
                "embed: " + std::to_string(listed.size()) + " groups, " +
                    std::to_string(stats.embed_calls) + " embed calls, " +
                    std::to_string(stats.cache_hits) + " cache hits");
}

namespace {

// (model, condition) -> saved group stem, from the embed manifest.
std::map<std::pair<std::string, Condition>, std::string> GroupStems(const ojson& manifest,
                                                                    const std::string& run_dir) {
  std::map<std::pair<std::string, Condition>, std::string> stems;
  for (const ojson& g : manifest.at("groups")) {
    stems[{g.at("model_id").get<std::string>(), ParseCondition(g.at("condition").get<std::string>())}] =
        (fs::path(run_dir) / g.at("path_stem").get<std::string>()).string();
  }
  return stems;
}

}  // namespace

StageResult Pipeline::Stats() {
  RequireManifest(Stage::kEmbed);
  const auto stems = GroupStems(ParseJsonFile(ManifestPath(Stage::kEmbed)), run_dir_);
  std::map<std::string, GroupEmbeddings> loaded;
  const auto load = [&](const std::string& stem) -> const GroupEmbeddings& {
    auto it = loaded.find(stem);
    if (it == loaded.end()) it = loaded.emplace(stem, LoadGroup(stem)).first;
    return it->second;
  };

  ojson results = ojson::array();
  ojson skipped = ojson::array();
  std::vector<std::string> outputs;
  for (const std::string& model : config_.ModelIds()) {
    for (const ComparisonSpec& spec : DefaultComparisons()) {
      const auto x_it = stems.find({model, spec.x});
      const auto y_it = stems.find({model, spec.y});
      if (x_it == stems.end() || y_it == stems.end()) {
        skipped.push_back({{"model_id", model}, {"family", spec.family},
                           {"comparison", spec.Label()}, {"reason", "group not generated"}});
        continue;
      }
      const auto [x, y] = AlignOnSharedIds(load(x_it->second), load(y_it->second));
      if (x.size() < 2) {
        skipped.push_back({{"model_id", model}, {"family", spec.family},
                           {"comparison", spec.Label()}, {"reason", "fewer than 2 pairs"}});
        continue;
      }
      for (const MetricKind metric : config_.stats.metrics) {
        PermutationOptions options;
        options.permutations = config_.stats.permutations;
        options.histogram_bins = config_.stats.bins;
        options.threads = config_.stats.threads;
        options.seed = SubstreamSeed(
            config_.seed, Fnv1a64(model + "\x1f" + spec.family + "\x1f" + spec.Label() + "\x1f" +
                                  std::string(MetricName(metric))));
        const DistanceMetric dm = metric == MetricKind::kMahalanobis
                                      ? DistanceMetric::Mahalanobis(config_.stats.mahalanobis_lambda)
                                      : DistanceMetric{metric, 0.0};
        const PermutationResult r = PermutationTest(x, y, dm, options);
        const ResultLabels labels{spec.family, spec.Label(), model};
        const std::string hist_path =
            StagePath(Stage::kStats, "histograms/" + SafeName(model) + "__" + spec.family + "__" +
                                         SafeName(spec.Label()) + "__" +
                                         std::string(MetricName(metric)) + ".json");
        WriteFile(hist_path, HistogramToJson(labels, r));
        outputs.push_back(Relative(hist_path, run_dir_));
        ojson j;
        j["condition"] = spec.family;
        j["comparison"] = spec.Label();
        j["model_id"] = model;
        j["metric"] = MetricName(metric);
        j["lambda"] = r.lambda;
        j["n"] = r.n;
        j["permutations"] = r.permutations;
        j["seed"] = r.seed;
        j["t_obs"] = r.t_obs;
        j["t_perm_mean"] = r.t_perm_mean;
        j["t_perm_sd"] = r.t_perm_sd;
        j["p_two_tailed"] = r.p_two_tailed;
        j["d_pairs"] = r.d_pairs;
        j["z_perm"] = r.z_perm;
        j["effect_size_band"] = EffectSizeBand(r.d_pairs);
        j["histogram"] = Relative(hist_path, run_dir_);
        results.push_back(std::move(j));
      }
    }
  }
  const std::string data_path = StagePath(Stage::kStats, "results.json");
  WriteFile(data_path, ojson({{"results", results}, {"skipped", skipped}}).dump(2) + "\n");
  outputs.insert(outputs.begin(), Relative(data_path, run_dir_));

  ojson m = NewManifest(Stage::kStats, config_hash_, config_);
  m["inputs"] = {{"embed", Relative(ManifestPath(Stage::kEmbed), run_dir_)}};
  m["outputs"] = outputs;
  m["counts"] = {{"results", results.size()}, {"skipped", skipped.size()}};
  return Finish(Stage::kStats, ManifestPath(Stage::kStats), m, kExitOk,
                "stats: " + std::to_string(results.size()) + " permutation tests (B = " +
                    std::to_string(config_.stats.permutations) + ")");
}

StageResult Pipeline::Tsne() {
  RequireManifest(Stage::kEmbed);
  const auto stems = GroupStems(ParseJsonFile(ManifestPath(Stage::kEmbed)), run_dir_);
  const std::vector<std::pair<std::string, std::vector<Condition>>> families = {
      {"implicit",
       {Condition::kImplicitOriginalM, Condition::kImplicitCounterfactualMF,
        Condition::kImplicitOriginalF, Condition::kImplicitCounterfactualFM}},
      {"explicit", {Condition::kExplicitM, Condition::kExplicitF, Condition::kExplicitN}},
  };
  ojson runs = ojson::array();
  ojson skipped = ojson::array();
  for (const std::string& model : config_.ModelIds()) {
    for (const auto& [family, conditions] : families) {
      std::vector<GroupEmbeddings> groups;
      for (const Condition c : conditions) {
        const auto it = stems.find({model, c});
        if (it != stems.end()) groups.push_back(LoadGroup(it->second));
      }
      Eigen::Index n = 0, dim = 0;
      for (const auto& g : groups) {
        n += g.size();
        dim = g.dim();
      }
      const double max_perplexity = static_cast<double>(n - 1) / 3.0 - 0.5;
      if (groups.empty() || max_perplexity <= 1.0) {
        skipped.push_back({{"model_id", model}, {"family", family},
                           {"reason", "too few points (" + std::to_string(n) + ")"}});
        continue;
      }
      MatrixXd x(n, dim);
      std::vector<std::string> ids, labels;
      Eigen::Index row = 0;
      for (const auto& g : groups) {
        x.middleRows(row, g.size()) = g.vectors;
        row += g.size();
        ids.insert(ids.end(), g.essay_ids.begin(), g.essay_ids.end());
        labels.insert(labels.end(), static_cast<size_t>(g.size()), g.group_label);
      }
      TsneConfig tc = config_.tsne;
      tc.perplexity = std::min(tc.perplexity, max_perplexity);
      tc.trustworthiness_k =
          std::min<int>(tc.trustworthiness_k, static_cast<int>((n - 1) / 2));
      const TsneResult result = TsneFit(x, ids, labels, tc);
      const std::string path = StagePath(Stage::kTsne, SafeName(model) + "__" + family + ".json");
      WriteFile(path, TsneToJson(result));
      runs.push_back({{"model_id", model},
                      {"family", family},
                      {"n", n},
                      {"perplexity", tc.perplexity},
                      {"trustworthiness_k", tc.trustworthiness_k},
                      {"trustworthiness", result.trustworthiness},
                      {"kl_final", result.kl_final},
                      {"path", Relative(path, run_dir_)}});
    }
  }
  ojson m = NewManifest(Stage::kTsne, config_hash_, config_);
  m["inputs"] = {{"embed", Relative(ManifestPath(Stage::kEmbed), run_dir_)}};
  m["runs"] = runs;
  m["skipped"] = skipped;
  return Finish(Stage::kTsne, ManifestPath(Stage::kTsne), m, kExitOk,
                "tsne: " + std::to_string(runs.size()) + " layouts");
}

StageResult Pipeline::Textstats() {
  RequireManifest(Stage::kGenerate);
  Require(!config_.textstats.academic_words.empty() && !config_.textstats.concreteness_norms.empty(),
          "textstats: textstats.academic_words and textstats.concreteness_norms must be configured");
  const ResourceLexicons resources =
      LoadResources(config_.textstats.academic_words, config_.textstats.concreteness_norms,
                    config_.textstats.patterns);
  const std::vector<FeedbackRecord> responses =
      LoadResponses(StagePath(Stage::kGenerate, "responses.jsonl"));
  std::map<std::string, std::vector<TextStatsRecord>> per_model;
  std::vector<TextStatsRecord> all;
  for (const FeedbackRecord& r : responses) {
    TextStatsRecord record =
        ComputeTextStats(r.essay_id, ConditionName(r.condition), r.response_text, resources);
    per_model[r.model_id].push_back(record);
    all.push_back(std::move(record));
  }
  std::vector<std::string> outputs;
  const std::string records_path = StagePath(Stage::kTextstats, "records.csv");
  std::string records_csv;
  {
    // Model id column first, then the per-record measurements.
    bool header = true;
    for (const auto& [model, records] : per_model) {
      const std::string csv = TextStatsRecordsToCsv(records);
      size_t pos = 0;
      while (pos < csv.size()) {
        const size_t nl = csv.find('\n', pos);
        const std::string line = csv.substr(pos, nl - pos);
        if (pos == 0) {
          if (header) records_csv += "model_id," + line + "\n";
          header = false;
        } else {
          records_csv += model + "," + line + "\n";
        }
        pos = nl + 1;
      }
    }
  }
  WriteFile(records_path, records_csv);
  outputs.push_back(Relative(records_path, run_dir_));
  for (const auto& [model, records] : per_model) {
    const std::vector<GroupSummary> summary = AggregateGroups(records);
    const std::string csv_path = StagePath(Stage::kTextstats, SafeName(model) + "__summary.csv");
    const std::string json_path = StagePath(Stage::kTextstats, SafeName(model) + "__summary.json");
    WriteFile(csv_path, GroupSummariesToCsv(summary));
    WriteFile(json_path, GroupSummariesToJson(summary));
    outputs.push_back(Relative(csv_path, run_dir_));
    outputs.push_back(Relative(json_path, run_dir_));
  }
  ojson m = NewManifest(Stage::kTextstats, config_hash_, config_);
  m["inputs"] = {{"generate", Relative(ManifestPath(Stage::kGenerate), run_dir_)}};
  m["patterns_version"] = resources.patterns_version;
  m["outputs"] = outputs;
  m["counts"] = {{"records", all.size()}, {"models", per_model.size()}};
  return Finish(Stage::kTextstats, ManifestPath(Stage::kTextstats), m, kExitOk,
                "textstats: " + std::to_string(all.size()) + " records");
}

StageResult Pipeline::Report() {
  RequireManifest(Stage::kStats);
  const ojson doc = ParseJsonFile(StagePath(Stage::kStats, "results.json"));
  std::vector<std::pair<ResultLabels, PermutationResult>> results;
  for (const ojson& j : doc.at("results")) {
    ResultLabels labels{j.at("condition").get<std::string>(), j.at("comparison").get<std::string>(),
                        j.at("model_id").get<std::string>()};
    PermutationResult r;
    r.metric = ParseMetric(j.at("metric").get<std::string>());
    r.lambda = j.at("lambda").get<double>();
    r.n = j.at("n").get<size_t>();
    r.permutations = j.at("permutations").get<size_t>();
    r.seed = j.at("seed").get<uint64_t>();
    r.t_obs = j.at("t_obs").get<double>();
    r.t_perm_mean = j.at("t_perm_mean").get<double>();
    r.t_perm_sd = j.at("t_perm_sd").get<double>();
    r.p_two_tailed = j.at("p_two_tailed").get<double>();
    r.d_pairs = j.at("d_pairs").get<double>();
    r.z_perm = j.at("z_perm").get<double>();
    results.emplace_back(std::move(labels), std::move(r));
  }
  const std::vector<ResultRow> rows =
      results.empty() ? std::vector<ResultRow>{} : BuildResultsTable(results);
  const std::string csv_path = StagePath(Stage::kReport, "results.csv");
  const std::string json_path = StagePath(Stage::kReport, "results.json");
  Emit(csv_path, ResultsToCsv(rows));
  Emit(json_path, ResultsToJson(rows));

  ojson m = NewManifest(Stage::kReport, config_hash_, config_);
  m["inputs"] = {{"stats", Relative(ManifestPath(Stage::kStats), run_dir_)}};
  m["outputs"] = {Relative(csv_path, run_dir_), Relative(json_path, run_dir_)};
  m["counts"] = {{"rows", rows.size()}};
  return Finish(Stage::kReport, ManifestPath(Stage::kReport), m, kExitOk,
                "report: " + std::to_string(rows.size()) + " rows -> " + csv_path);
}

}  // namespace feedbias
