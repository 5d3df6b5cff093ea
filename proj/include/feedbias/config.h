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

#ifndef FEEDBIAS_CONFIG_H_
#define FEEDBIAS_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/corpus.h"
#include "feedbias/distance.h"
#include "feedbias/embedder.h"
#include "feedbias/llmclient.h"
#include "feedbias/tsne.h"

namespace feedbias {

struct CorpusSettings {
  std::string path;
  ColumnMapping columns;
  ScreeningConfig screening;  // screening.seed follows the experiment seed
};

struct ModelSettings {
  std::string id;
  ModelEndpointConfig endpoint;
};

struct MockSettings {
  bool enabled = false;
  MockMode mode = MockMode::kBiased;
  size_t embedding_dim = 256;
};

struct StatsSettings {
  std::vector<MetricKind> metrics = {MetricKind::kCosine, MetricKind::kEuclidean};
  size_t permutations = 5000;
  size_t bins = 50;
  double mahalanobis_lambda = -1.0;  // negative: 0.1 * trace / dim
  size_t threads = 1;
};

struct TextStatsSettings {
  std::string academic_words;
  std::string concreteness_norms;
  std::string patterns;  // empty: built-in marker lists
};

// All paths are resolved against the directory of the config file.
struct ExperimentConfig {
  std::string run_root = "runs";
  uint64_t seed = 0;
  CorpusSettings corpus;
  std::string lexicon_path;
  std::string templates_path;  // empty: built-in templates
  std::vector<ModelSettings> models;
  MockSettings mock;
  size_t parallelism = 4;
  EmbeddingEndpointConfig embedding;
  StatsSettings stats;
  TsneConfig tsne;
  TextStatsSettings textstats;

  void Validate() const;
  std::vector<std::string> ModelIds() const;
};

// Unknown keys are rejected. Relative paths are resolved against `base_dir`.
ExperimentConfig ParseConfig(std::string_view json_text, const std::string& base_dir);
ExperimentConfig LoadConfig(const std::string& path);

// Canonical JSON echo of the effective config (environment variable names
// only, never secret values); the seed is excluded.
std::string ConfigToJson(const ExperimentConfig& config);
// First 12 hex digits of SHA-256 over ConfigToJson.
std::string ConfigHash(const ExperimentConfig& config);

struct ConfigOverrides {
  std::optional<uint64_t> seed;
  std::optional<bool> mock;
  std::optional<MockMode> mock_mode;
  std::optional<std::vector<std::string>> models;
  std::optional<std::vector<MetricKind>> metrics;
  std::optional<size_t> permutations;
};

// In mock mode an unknown model id becomes a mock-only model; otherwise it is
// a validation error.
void ApplyOverrides(ExperimentConfig& config, const ConfigOverrides& overrides);

}  // namespace feedbias

#endif  // FEEDBIAS_CONFIG_H_
