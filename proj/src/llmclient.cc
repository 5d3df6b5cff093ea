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

#include "feedbias/llmclient.h"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "feedbias/rng.h"
#include "feedbias/text.h"
#include "json.hpp"

namespace feedbias {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr const char* kMockTimestamp = "1970-01-01T00:00:00Z";

// Base feedback: each slot picks one variant from the seed.
constexpr std::array<std::array<const char*, 3>, 4> kBaseSlots = {{
    {"Thank you for sharing this essay.",
     "Thanks for submitting your essay.",
     "I enjoyed reading this essay."},
    {"The main argument is clear and the position is stated early.",
     "Your central claim comes through and the stance is easy to follow.",
     "The thesis is identifiable and the overall argument is coherent."},
    {"Several body paragraphs would benefit from more specific evidence and examples.",
     "Some paragraphs need stronger supporting details to back up each point.",
     "The supporting evidence could be more detailed in a few places."},
    {"Check transitions between paragraphs and proofread for spelling.",
     "Review the links between ideas and proofread for small errors.",
     "Smooth the transitions and check spelling and punctuation once more."},
}};

constexpr const char* kControllingBlock =
    "You must restructure the introduction before anything else. Make sure every paragraph "
    "follows the required order. Avoid informal phrasing and do not skip the conclusion. You "
    "need to focus on grammar and spelling first.";

constexpr const char* kAutonomyBlock =
    "You could explore a bolder counterargument if it interests you. Perhaps consider expanding "
    "your strongest example in your own way. You might want to try a different opening, and feel "
    "free to experiment with the structure.";

enum class Cue { kNone, kMale, kFemale };

Cue DetectCue(const PromptJob& job, const GenderLexicon& lexicon) {
  switch (job.condition) {
    case Condition::kExplicitM:
      return Cue::kMale;
    case Condition::kExplicitF:
      return Cue::kFemale;
    case Condition::kExplicitN:
      return Cue::kNone;
    default:
      break;
  }
  const GenderTermCounts counts = CountGenderTerms(job.rendered_prompt, lexicon);
  if (counts.female_count > counts.male_count) return Cue::kFemale;
  if (counts.male_count > counts.female_count) return Cue::kMale;
  return Cue::kNone;
}

}  // namespace

std::string_view ResponseSourceName(ResponseSource source) {
  switch (source) {
    case ResponseSource::kLive:
      return "live";
    case ResponseSource::kMock:
      return "mock";
    case ResponseSource::kCache:
      return "cache";
  }
  return "live";
}

ResponseSource ParseResponseSource(std::string_view name) {
  if (name == "live") return ResponseSource::kLive;
  if (name == "mock") return ResponseSource::kMock;
  if (name == "cache") return ResponseSource::kCache;
  Fail(ErrorKind::kValidation, "unknown response source '" + std::string(name) + "'");
}

std::string FeedbackRecordToJsonLine(const FeedbackRecord& record) {
  ordered_json j;
  j["job_id"] = record.job_id;
  j["essay_id"] = record.essay_id;
  j["condition"] = ConditionName(record.condition);
  j["model_id"] = record.model_id;
  j["response_text"] = record.response_text;
  j["created_at"] = record.created_at;
  j["attempt_count"] = record.attempt_count;
  j["source"] = ResponseSourceName(record.source);
  return j.dump();
}

FeedbackRecord FeedbackRecordFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    FeedbackRecord r;
    r.job_id = j.at("job_id").get<std::string>();
    r.essay_id = j.at("essay_id").get<std::string>();
    r.condition = ParseCondition(j.at("condition").get<std::string>());
    r.model_id = j.at("model_id").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.attempt_count = j.at("attempt_count").get<int>();
    r.source = ParseResponseSource(j.at("source").get<std::string>());
    Require(!r.response_text.empty(), "feedback record " + r.job_id + " has empty response");
    return r;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kValidation, std::string("malformed feedback record: ") + e.what());
  }
}

void ModelEndpointConfig::Validate() const {
  Require(!base_url.empty(), "endpoint base_url is empty");
  Require(!model.empty(), "endpoint model name is empty");
  Require(timeout.count() > 0, "endpoint timeout must be > 0");
  Require(retry.max_retries >= 0 && retry.max_retries <= 10, "max_retries must be in [0, 10]");
}

HttpChatBackend::HttpChatBackend(ModelEndpointConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.Validate();
}

std::string HttpChatBackend::RequestBody(std::string_view prompt) const {
  ordered_json body;
  body["model"] = config_.model;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  if (config_.temperature) body["temperature"] = *config_.temperature;
  return body.dump();
}

FeedbackRecord HttpChatBackend::Complete(const PromptJob& job) {
  std::string bearer;
  if (!config_.api_key_env.empty()) {
    if (const char* value = std::getenv(config_.api_key_env.c_str())) bearer = value;
  }
  const std::string body = RequestBody(job.rendered_prompt);
  std::string content;
  const auto attempt = [&]() -> AttemptOutcome {
    const HttpResponse response =
        PostJson(config_.base_url, "/chat/completions", body, bearer, config_.timeout);
    AttemptOutcome outcome = ClassifyHttp(response);
    if (!outcome.ok) return outcome;
    try {
      const auto j = nlohmann::json::parse(response.body);
      const auto& message = j.at("choices").at(0).at("message");
      content = message.at("content").is_string() ? message["content"].get<std::string>() : "";
    } catch (const nlohmann::json::exception& e) {
      return {false, true, std::nullopt, std::string("unparseable completion: ") + e.what()};
    }
    if (content.empty()) return {false, true, std::nullopt, "empty completion"};
    return outcome;
  };
  const RetryReport report =
      CallWithRetries(attempt, config_.retry, sleeper_, Fnv1a64(job.job_id));
  if (!report.ok) {
    Fail(ErrorKind::kTransport, "job " + job.job_id + " failed after " +
                                    std::to_string(report.attempts) +
                                    " attempts: " + report.last_error);
  }
  return {job.job_id,       job.essay_id, job.condition,   job.model_id,
          content,          UtcNow(),     report.attempts, ResponseSource::kLive};
}

std::string_view MockModeName(MockMode mode) {
  return mode == MockMode::kBiased ? "biased" : "unbiased";
}

MockMode ParseMockMode(std::string_view name) {
  if (name == "biased") return MockMode::kBiased;
  if (name == "unbiased") return MockMode::kUnbiased;
  Fail(ErrorKind::kValidation, "unknown mock mode '" + std::string(name) + "'");
}

FeedbackRecord MockComplete(const PromptJob& job, MockMode mode, uint64_t seed,
                            const GenderLexicon& lexicon) {
  SeededRng phrasing(seed, Fnv1a64(job.job_id));
  std::string text;
  for (const auto& slot : kBaseSlots) {
    if (!text.empty()) text.push_back(' ');
    text.append(slot[phrasing.Below(slot.size())]);
  }
  if (mode == MockMode::kBiased) {
    switch (DetectCue(job, lexicon)) {
      case Cue::kFemale:
        text.append(" ").append(kControllingBlock);
        break;
      case Cue::kMale:
        text.append(" ").append(kAutonomyBlock);
        break;
      case Cue::kNone:
        break;
    }
  }
  return {job.job_id, job.essay_id, job.condition, job.model_id, std::move(text),
          kMockTimestamp, 1, ResponseSource::kMock};
}

FeedbackRecord MockChatBackend::Complete(const PromptJob& job) {
  ++calls_;
  return MockComplete(job, mode_, seed_, lexicon_);
}

ResponseCache::ResponseCache(std::string directory) : directory_(std::move(directory)) {}

std::string ResponseCache::PathFor(const std::string& model_id) const {
  std::string safe;
  for (char c : model_id) {
    safe.push_back(IsWordByte(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  }
  return (std::filesystem::path(directory_) / (safe + ".jsonl")).string();
}

void ResponseCache::LoadModel(const std::string& model_id) {
  if (index_.contains(model_id)) return;
  auto& entries = index_[model_id];
  std::ifstream in(PathFor(model_id));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FeedbackRecord record;
    try {
      record = FeedbackRecordFromJson(line);
    } catch (const Error&) {
      continue;  // a torn final line from an interrupted run
    }
    entries.emplace(record.job_id, std::move(record));
  }
}

std::optional<FeedbackRecord> ResponseCache::Lookup(const std::string& model_id,
                                                    const std::string& job_id) {
  std::lock_guard lock(mutex_);
  LoadModel(model_id);
  const auto& entries = index_[model_id];
  const auto it = entries.find(job_id);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::Append(const FeedbackRecord& record) {
  std::lock_guard lock(mutex_);
  LoadModel(record.model_id);
  std::filesystem::create_directories(directory_);
  const std::string path = PathFor(record.model_id);
  bool torn_tail = false;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      torn_tail = in.get() != '\n';
    }
  }
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot append to cache " + path);
  if (torn_tail) out << '\n';
  out << FeedbackRecordToJsonLine(record) << '\n';
  out.flush();
  index_[record.model_id].insert_or_assign(record.job_id, record);
}

BatchResult RunBatch(const std::vector<PromptJob>& plan, const BackendMap& backends,
                     ResponseCache& cache, size_t parallelism) {
  Require(!plan.empty(), "plan is empty");
  Require(parallelism >= 1, "parallelism must be >= 1");
  BatchResult result;

  std::vector<std::optional<FeedbackRecord>> slots(plan.size());
  std::vector<size_t> misses;
  std::set<std::string> scheduled;
  for (size_t i = 0; i < plan.size(); ++i) {
    const PromptJob& job = plan[i];
    Require(backends.contains(job.model_id), "no backend for model '" + job.model_id + "'");
    if (auto hit = cache.Lookup(job.model_id, job.job_id)) {
      hit->source = ResponseSource::kCache;
      slots[i] = std::move(*hit);
      ++result.cache_hits;
    } else if (scheduled.insert(job.model_id + '\x1f' + job.job_id).second) {
      misses.push_back(i);
    }
  }

  std::atomic<size_t> next{0};
  std::atomic<size_t> calls{0};
  std::mutex failure_mutex;
  std::vector<std::pair<size_t, std::string>> failures;
  const auto worker = [&] {
    while (true) {
      const size_t k = next.fetch_add(1);
      if (k >= misses.size()) return;
      const size_t i = misses[k];
      const PromptJob& job = plan[i];
      try {
        ++calls;
        FeedbackRecord record = backends.at(job.model_id)->Complete(job);
        Require(!record.response_text.empty(), "empty response for job " + job.job_id);
        cache.Append(record);
        slots[i] = std::move(record);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        failures.emplace_back(i, e.what());
      }
    }
  };
  const size_t threads = std::min(parallelism, misses.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  result.backend_calls = calls.load();

  // Duplicate job ids within the plan share the single completion.
  for (size_t i = 0; i < plan.size(); ++i) {
    if (slots[i]) continue;
    for (size_t j = 0; j < plan.size(); ++j) {
      if (j != i && slots[j] && plan[j].job_id == plan[i].job_id &&
          plan[j].model_id == plan[i].model_id) {
        slots[i] = slots[j];
        break;
      }
    }
  }
  std::sort(failures.begin(), failures.end());
  for (const auto& [index, message] : failures) {
    result.failed_job_ids.push_back(plan[index].job_id);
    result.failure_messages.push_back(message);
  }
  for (auto& slot : slots) {
    if (slot) result.records.push_back(std::move(*slot));
  }
  return result;
}

}  // namespace feedbias
