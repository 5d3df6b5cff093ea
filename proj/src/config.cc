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

#include "feedbias/config.h"

#include <algorithm>
#include <filesystem>
#include <set>

#include "json.hpp"

#include "feedbias/common.h"
#include "feedbias/text.h"

namespace feedbias {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Typed access to one JSON object with unknown-key rejection.
class Section {
 public:
  Section(const ojson& value, std::string where) : value_(value), where_(std::move(where)) {
    Require(value_.is_object(), where_ + " must be a JSON object");
  }

  void AllowOnly(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : value_.items()) {
      Require(allowed.count(key) > 0, where_ + ": unknown key '" + key + "'");
    }
  }

  bool Has(const char* key) const { return value_.contains(key); }

  template <typename T>
  void Read(const char* key, T& out) const {
    if (!value_.contains(key)) return;
    try {
      out = value_.at(key).get<T>();
    } catch (const ojson::exception&) {
      Fail(ErrorKind::kValidation, where_ + ": '" + key + "' has the wrong type");
    }
  }

  Section Child(const char* key) const { return Section(value_.at(key), where_ + "." + key); }
  const ojson& Raw(const char* key) const { return value_.at(key); }

 private:
  const ojson& value_;
  std::string where_;
};

std::string Resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::chrono::milliseconds Seconds(double s) {
  return std::chrono::milliseconds(static_cast<int64_t>(s * 1000.0));
}

double ToSeconds(std::chrono::milliseconds ms) { return static_cast<double>(ms.count()) / 1000.0; }

ModelSettings ParseModel(const Section& s) {
  s.AllowOnly({"id", "base_url", "model", "temperature", "timeout_s", "max_retries",
               "api_key_env"});
  ModelSettings m;
  s.Read("id", m.id);
  s.Read("base_url", m.endpoint.base_url);
  s.Read("model", m.endpoint.model);
  if (m.endpoint.model.empty()) m.endpoint.model = m.id;
  if (s.Has("temperature") && !s.Raw("temperature").is_null()) {
    double t = 0.0;
    s.Read("temperature", t);
    m.endpoint.temperature = t;
  }
  double timeout_s = 60.0;
  s.Read("timeout_s", timeout_s);
  m.endpoint.timeout = Seconds(timeout_s);
  s.Read("max_retries", m.endpoint.retry.max_retries);
  s.Read("api_key_env", m.endpoint.api_key_env);
  Require(!m.id.empty(), "models: every model needs an 'id'");
  return m;
}

std::string SelectionName(Selection s) {
  return s == Selection::kSeededSample ? "seeded-sample" : "corpus-order";
}

}  // namespace

void ExperimentConfig::Validate() const {
  Require(!corpus.path.empty(), "config: corpus.path is required");
  Require(!lexicon_path.empty(), "config: lexicon_path is required");
  Require(!models.empty(), "config: at least one model is required");
  std::set<std::string> ids;
  for (const ModelSettings& m : models) {
    Require(ids.insert(m.id).second, "config: duplicate model id '" + m.id + "'");
    Require(m.id.find_first_of("/\\ ") == std::string::npos,
            "config: model id '" + m.id + "' must not contain '/', '\\' or spaces");
    if (!mock.enabled) m.endpoint.Validate();
  }
  Require(parallelism >= 1, "config: generation.parallelism must be >= 1");
  Require(corpus.screening.per_group_cap >= 1, "config: corpus.per_group_cap must be >= 1");
  Require(!stats.metrics.empty(), "config: stats.metrics must be non-empty");
  Require(stats.permutations >= 100, "config: stats.permutations must be >= 100");
  Require(stats.bins >= 1, "config: stats.bins must be >= 1");
  Require(stats.threads >= 1, "config: stats.threads must be >= 1");
  Require(tsne.perplexity > 1.0, "config: tsne.perplexity must be > 1");
  Require(tsne.iterations > 0, "config: tsne.iterations must be > 0");
  Require(tsne.trustworthiness_k >= 1, "config: tsne.trustworthiness_k must be >= 1");
  Require(mock.embedding_dim >= 1, "config: mock.embedding_dim must be >= 1");
  if (!mock.enabled) {
    Require(!embedding.base_url.empty(), "config: embedding.base_url is required without mock");
  }
}

std::vector<std::string> ExperimentConfig::ModelIds() const {
  std::vector<std::string> ids;
  for (const ModelSettings& m : models) ids.push_back(m.id);
  return ids;
}

ExperimentConfig ParseConfig(std::string_view json_text, const std::string& base_dir) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const ojson::exception& e) {
    Fail(ErrorKind::kValidation, std::string("config: invalid JSON: ") + e.what());
  }
  const Section root(doc, "config");
  root.AllowOnly({"run_root", "seed", "corpus", "lexicon_path", "templates_path", "models", "mock",
                  "generation", "embedding", "stats", "tsne", "textstats"});
  ExperimentConfig c;
  root.Read("run_root", c.run_root);
  root.Read("seed", c.seed);
  root.Read("lexicon_path", c.lexicon_path);
  root.Read("templates_path", c.templates_path);

  if (root.Has("corpus")) {
    const Section s = root.Child("corpus");
    s.AllowOnly({"path", "id_column", "text_column", "topic_column", "per_group_cap",
                 "require_exclusive", "min_tokens", "selection"});
    s.Read("path", c.corpus.path);
    s.Read("id_column", c.corpus.columns.id_column);
    s.Read("text_column", c.corpus.columns.text_column);
    s.Read("topic_column", c.corpus.columns.topic_column);
    s.Read("per_group_cap", c.corpus.screening.per_group_cap);
    s.Read("require_exclusive", c.corpus.screening.require_exclusive);
    s.Read("min_tokens", c.corpus.screening.min_tokens);
    std::string selection = "corpus-order";
    s.Read("selection", selection);
    Require(selection == "corpus-order" || selection == "seeded-sample",
            "config: corpus.selection must be 'corpus-order' or 'seeded-sample'");
    c.corpus.screening.selection =
        selection == "seeded-sample" ? Selection::kSeededSample : Selection::kCorpusOrder;
  }

  if (root.Has("models")) {
    const ojson& models = root.Raw("models");
    Require(models.is_array(), "config: models must be an array");
    for (size_t i = 0; i < models.size(); ++i) {
      c.models.push_back(ParseModel(Section(models[i], "config.models[" + std::to_string(i) + "]")));
    }
  }

  if (root.Has("mock")) {
    const Section s = root.Child("mock");
    s.AllowOnly({"enabled", "mode", "embedding_dim"});
    s.Read("enabled", c.mock.enabled);
    std::string mode = "biased";
    s.Read("mode", mode);
    c.mock.mode = ParseMockMode(mode);
    s.Read("embedding_dim", c.mock.embedding_dim);
  }

  if (root.Has("generation")) {
    const Section s = root.Child("generation");
    s.AllowOnly({"parallelism"});
    s.Read("parallelism", c.parallelism);
  }

  if (root.Has("embedding")) {
    const Section s = root.Child("embedding");
    s.AllowOnly({"base_url", "model", "expected_dim", "timeout_s", "max_retries", "api_key_env"});
    s.Read("base_url", c.embedding.base_url);
    s.Read("model", c.embedding.model);
    s.Read("expected_dim", c.embedding.expected_dim);
    double timeout_s = 60.0;
    s.Read("timeout_s", timeout_s);
    c.embedding.timeout = Seconds(timeout_s);
    s.Read("max_retries", c.embedding.retry.max_retries);
    s.Read("api_key_env", c.embedding.api_key_env);
  }

  if (root.Has("stats")) {
    const Section s = root.Child("stats");
    s.AllowOnly({"metrics", "permutations", "bins", "mahalanobis_lambda", "threads"});
    if (s.Has("metrics")) {
      std::vector<std::string> names;
      s.Read("metrics", names);
      c.stats.metrics.clear();
      for (const std::string& name : names) c.stats.metrics.push_back(ParseMetric(name));
    }
    s.Read("permutations", c.stats.permutations);
    s.Read("bins", c.stats.bins);
    s.Read("mahalanobis_lambda", c.stats.mahalanobis_lambda);
    s.Read("threads", c.stats.threads);
  }

  if (root.Has("tsne")) {
    const Section s = root.Child("tsne");
    s.AllowOnly({"perplexity", "iterations", "learning_rate", "early_exaggeration",
                 "exaggeration_iterations", "trustworthiness_k"});
    s.Read("perplexity", c.tsne.perplexity);
    s.Read("iterations", c.tsne.iterations);
    s.Read("learning_rate", c.tsne.learning_rate);
    s.Read("early_exaggeration", c.tsne.early_exaggeration);
    s.Read("exaggeration_iterations", c.tsne.exaggeration_iterations);
    s.Read("trustworthiness_k", c.tsne.trustworthiness_k);
    c.tsne.momentum_switch_iteration = c.tsne.exaggeration_iterations;
  }

  if (root.Has("textstats")) {
    const Section s = root.Child("textstats");
    s.AllowOnly({"academic_words", "concreteness_norms", "patterns"});
    s.Read("academic_words", c.textstats.academic_words);
    s.Read("concreteness_norms", c.textstats.concreteness_norms);
    s.Read("patterns", c.textstats.patterns);
  }

  c.run_root = Resolve(base_dir, c.run_root);
  c.corpus.path = Resolve(base_dir, c.corpus.path);
  c.lexicon_path = Resolve(base_dir, c.lexicon_path);
  c.templates_path = Resolve(base_dir, c.templates_path);
  c.textstats.academic_words = Resolve(base_dir, c.textstats.academic_words);
  c.textstats.concreteness_norms = Resolve(base_dir, c.textstats.concreteness_norms);
  c.textstats.patterns = Resolve(base_dir, c.textstats.patterns);
  c.corpus.screening.seed = c.seed;
  c.tsne.seed = c.seed;
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  const std::string base = fs::absolute(fs::path(path)).parent_path().string();
  return ParseConfig(ReadFile(path), base);
}

std::string ConfigToJson(const ExperimentConfig& c) {
  ojson doc;
  doc["corpus"] = {{"path", c.corpus.path},
                   {"id_column", c.corpus.columns.id_column},
                   {"text_column", c.corpus.columns.text_column},
                   {"topic_column", c.corpus.columns.topic_column},
                   {"per_group_cap", c.corpus.screening.per_group_cap},
                   {"require_exclusive", c.corpus.screening.require_exclusive},
                   {"min_tokens", c.corpus.screening.min_tokens},
                   {"selection", SelectionName(c.corpus.screening.selection)}};
  doc["lexicon_path"] = c.lexicon_path;
  doc["templates_path"] = c.templates_path;
  doc["models"] = ojson::array();
  for (const ModelSettings& m : c.models) {
    ojson model;
    model["id"] = m.id;
    model["base_url"] = m.endpoint.base_url;
    model["model"] = m.endpoint.model;
    model["temperature"] = m.endpoint.temperature ? ojson(*m.endpoint.temperature) : ojson(nullptr);
    model["timeout_s"] = ToSeconds(m.endpoint.timeout);
    model["max_retries"] = m.endpoint.retry.max_retries;
    model["api_key_env"] = m.endpoint.api_key_env;
    doc["models"].push_back(std::move(model));
  }
  doc["mock"] = {{"enabled", c.mock.enabled},
                 {"mode", MockModeName(c.mock.mode)},
                 {"embedding_dim", c.mock.embedding_dim}};
  doc["generation"] = {{"parallelism", c.parallelism}};
  doc["embedding"] = {{"base_url", c.embedding.base_url},
                      {"model", c.embedding.model},
                      {"expected_dim", c.embedding.expected_dim},
                      {"timeout_s", ToSeconds(c.embedding.timeout)},
                      {"max_retries", c.embedding.retry.max_retries},
                      {"api_key_env", c.embedding.api_key_env}};
  ojson metrics = ojson::array();
  for (const MetricKind m : c.stats.metrics) metrics.push_back(MetricName(m));
  doc["stats"] = {{"metrics", metrics},
                  {"permutations", c.stats.permutations},
                  {"bins", c.stats.bins},
                  {"mahalanobis_lambda", c.stats.mahalanobis_lambda}};
  doc["tsne"] = {{"perplexity", c.tsne.perplexity},
                 {"iterations", c.tsne.iterations},
                 {"learning_rate", c.tsne.learning_rate},
                 {"early_exaggeration", c.tsne.early_exaggeration},
                 {"exaggeration_iterations", c.tsne.exaggeration_iterations},
                 {"trustworthiness_k", c.tsne.trustworthiness_k}};
  doc["textstats"] = {{"academic_words", c.textstats.academic_words},
                      {"concreteness_norms", c.textstats.concreteness_norms},
                      {"patterns", c.textstats.patterns}};
  return doc.dump(2);
}

std::string ConfigHash(const ExperimentConfig& config) {
  return Sha256Hex(ConfigToJson(config)).substr(0, 12);
}

void ApplyOverrides(ExperimentConfig& c, const ConfigOverrides& o) {
  if (o.seed) {
    c.seed = *o.seed;
    c.corpus.screening.seed = *o.seed;
    c.tsne.seed = *o.seed;
  }
  if (o.mock) c.mock.enabled = *o.mock;
  if (o.mock_mode) c.mock.mode = *o.mock_mode;
  if (o.models) {
    std::vector<ModelSettings> selected;
    for (const std::string& id : *o.models) {
      const auto it = std::find_if(c.models.begin(), c.models.end(),
                                   [&](const ModelSettings& m) { return m.id == id; });
      if (it != c.models.end()) {
        selected.push_back(*it);
        continue;
      }
      Require(c.mock.enabled, "--models: unknown model id '" + id + "'");
      ModelSettings mock_model;
      mock_model.id = id;
      mock_model.endpoint.model = id;
      selected.push_back(std::move(mock_model));
    }
    c.models = std::move(selected);
  }
  if (o.metrics) c.stats.metrics = *o.metrics;
  if (o.permutations) c.stats.permutations = *o.permutations;
  c.Validate();
}

}  // namespace feedbias
