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

#ifndef FEEDBIAS_PIPELINE_H_
#define FEEDBIAS_PIPELINE_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/config.h"
#include "feedbias/promptgen.h"

namespace feedbias {

enum class Stage { kScreen, kCounterfact, kPlan, kGenerate, kEmbed, kStats, kTsne, kTextstats, kReport };

inline constexpr std::array<Stage, 9> kAllStages = {
    Stage::kScreen, Stage::kCounterfact, Stage::kPlan,      Stage::kGenerate, Stage::kEmbed,
    Stage::kStats,  Stage::kTsne,        Stage::kTextstats, Stage::kReport,
};

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPartialBatch = 3;

struct StageResult {
  Stage stage = Stage::kScreen;
  int exit_code = kExitOk;
  std::string manifest_path;
  std::string summary;  // one human-readable line
};

// A paired comparison between two conditions of the same model.
struct ComparisonSpec {
  std::string family;  // implicit | explicit | baseline
  Condition x;
  Condition y;
  std::string Label() const;  // e.g. "M vs M-F"
};

const std::vector<ComparisonSpec>& DefaultComparisons();

// Runs stages inside run_root/<config hash>-s<seed>. Every stage writes a
// manifest echoing the config; later stages read their predecessor's manifest
// and fail with the missing path and producing stage when it is absent.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const std::string& run_dir() const { return run_dir_; }
  std::string ManifestPath(Stage stage) const;

  StageResult Run(Stage stage);
  // Runs every stage in order and stops at the first non-zero exit code.
  std::vector<StageResult> RunAll();

 private:
  StageResult Screen();
  StageResult Counterfact();
  StageResult Plan();
  StageResult Generate();
  StageResult Embed();
  StageResult Stats();
  StageResult Tsne();
  StageResult Textstats();
  StageResult Report();

  std::string StagePath(Stage stage, std::string_view name) const;
  void RequireManifest(Stage producer) const;

  ExperimentConfig config_;
  std::string config_hash_;
  std::string run_dir_;
};

}  // namespace feedbias

#endif  // FEEDBIAS_PIPELINE_H_
