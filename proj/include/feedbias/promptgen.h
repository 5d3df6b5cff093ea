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

#ifndef FEEDBIAS_PROMPTGEN_H_
#define FEEDBIAS_PROMPTGEN_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/corpus.h"

namespace feedbias {

enum class Condition {
  kImplicitOriginalM,
  kImplicitCounterfactualMF,
  kImplicitOriginalF,
  kImplicitCounterfactualFM,
  kExplicitM,
  kExplicitF,
  kExplicitN,
  kBaselineMPrime,
};

inline constexpr std::array<Condition, 8> kAllConditions = {
    Condition::kImplicitOriginalM, Condition::kImplicitCounterfactualMF,
    Condition::kImplicitOriginalF, Condition::kImplicitCounterfactualFM,
    Condition::kExplicitM,         Condition::kExplicitF,
    Condition::kExplicitN,         Condition::kBaselineMPrime,
};

std::string_view ConditionName(Condition condition);
Condition ParseCondition(std::string_view name);
// Short group label used in comparisons: M, M-F, F, F-M, M, F, N, M'.
std::string_view GroupLabel(Condition condition);
bool IsExplicit(Condition condition);
bool UsesCounterfactualText(Condition condition);

// One template per condition kind, each with a single {{essay}} placeholder.
struct TemplateSet {
  std::string version;
  std::map<Condition, std::string> templates;

  // Neutral role line + Table-3 style backgrounds prepended for explicit kinds.
  static TemplateSet Default();
};

// JSON: {"version": "...", "templates": {"<condition name>": "...", ...}}
TemplateSet ParseTemplateSet(std::string_view json_text);
TemplateSet LoadTemplateSet(const std::string& path);
std::string TemplateSetToJson(const TemplateSet& templates);

std::string RenderPrompt(std::string_view essay_text, Condition condition,
                         const TemplateSet& templates);

enum class TextVariant { kOriginal, kCounterfactual };

struct PromptJob {
  std::string job_id;
  std::string essay_id;
  Condition condition = Condition::kImplicitOriginalM;
  std::string model_id;
  std::string rendered_prompt;
  TextVariant text_variant = TextVariant::kOriginal;
};

// Content hash over (essay text used, condition, template version, model id).
// Baseline jobs mix in a salt so they never collide with implicit-original-M.
std::string MakeJobId(std::string_view essay_text, Condition condition,
                      std::string_view template_version, std::string_view model_id);

// Per model, in order: implicit (M essays: original, counterfactual; then F
// essays), explicit (each essay x M, F, N), baseline (M essays).
std::vector<PromptJob> PlanExperiment(const ScreenedCorpus& corpus,
                                      const std::vector<CounterfactualPair>& pairs,
                                      const std::vector<std::string>& models,
                                      const TemplateSet& templates);

}  // namespace feedbias

#endif  // FEEDBIAS_PROMPTGEN_H_
