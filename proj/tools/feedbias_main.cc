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

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "feedbias/common.h"
#include "feedbias/config.h"
#include "feedbias/pipeline.h"

namespace {

struct Flags {
  std::string config_path;
  std::optional<uint64_t> seed;
  bool mock = false;
  std::string mock_mode;
  std::string models;
  std::string metric;
  std::optional<size_t> permutations;
};

std::vector<std::string> SplitCommaList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void AddCommonFlags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("-c,--config", flags.config_path, "Experiment config (JSON)")->required();
  cmd.add_option("--seed", flags.seed, "Override the experiment seed");
  cmd.add_flag("--mock", flags.mock, "Use the mock LLM and mock embedder");
  cmd.add_option("--mock-mode", flags.mock_mode, "Mock LLM behaviour")
      ->check(CLI::IsMember({"biased", "unbiased"}));
  cmd.add_option("--models", flags.models, "Comma-separated model ids");
  cmd.add_option("--metric", flags.metric, "Comma-separated metrics (cosine, euclidean, mahalanobis)");
  cmd.add_option("--permutations", flags.permutations, "Permutation count B")
      ->check(CLI::Range(size_t{100}, size_t{10000000}));
}

feedbias::ExperimentConfig EffectiveConfig(const Flags& flags) {
  feedbias::ExperimentConfig config = feedbias::LoadConfig(flags.config_path);
  feedbias::ConfigOverrides o;
  o.seed = flags.seed;
  if (flags.mock) o.mock = true;
  if (!flags.mock_mode.empty()) o.mock_mode = feedbias::ParseMockMode(flags.mock_mode);
  if (!flags.models.empty()) o.models = SplitCommaList(flags.models);
  if (!flags.metric.empty()) {
    std::vector<feedbias::MetricKind> metrics;
    for (const std::string& name : SplitCommaList(flags.metric)) {
      metrics.push_back(feedbias::ParseMetric(name));
    }
    o.metrics = metrics;
  }
  o.permutations = flags.permutations;
  feedbias::ApplyOverrides(config, o);
  return config;
}

int ExitCodeFor(const feedbias::Error& e) {
  return e.kind() == feedbias::ErrorKind::kValidation ? feedbias::kExitValidation
                                                      : feedbias::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feedbias: gender bias measurement for LLM essay feedback"};
  app.require_subcommand(1);
  Flags flags;

  std::vector<std::pair<CLI::App*, std::optional<feedbias::Stage>>> commands;
  for (const feedbias::Stage stage : feedbias::kAllStages) {
    CLI::App* cmd = app.add_subcommand(std::string(feedbias::StageName(stage)),
                                       "Run the " + std::string(feedbias::StageName(stage)) + " stage");
    AddCommonFlags(*cmd, flags);
    commands.emplace_back(cmd, stage);
  }
  CLI::App* all = app.add_subcommand("all", "Run every stage in order");
  AddCommonFlags(*all, flags);
  commands.emplace_back(all, std::nullopt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : feedbias::kExitValidation;
  }

  try {
    feedbias::Pipeline pipeline(EffectiveConfig(flags));
    std::vector<feedbias::StageResult> results;
    for (const auto& [cmd, stage] : commands) {
      if (!cmd->parsed()) continue;
      if (stage) {
        results.push_back(pipeline.Run(*stage));
      } else {
        results = pipeline.RunAll();
      }
    }
    int code = feedbias::kExitOk;
    for (const auto& r : results) {
      std::printf("%s\n", r.summary.c_str());
      if (r.exit_code != feedbias::kExitOk) code = r.exit_code;
    }
    std::printf("run dir: %s\n", pipeline.run_dir().c_str());
    return code;
  } catch (const feedbias::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return feedbias::kExitFailure;
  }
}
