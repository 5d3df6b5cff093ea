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

#ifndef FEEDBIAS_LLMCLIENT_H_
#define FEEDBIAS_LLMCLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "feedbias/http.h"
#include "feedbias/lexicon.h"
#include "feedbias/promptgen.h"

namespace feedbias {

enum class ResponseSource { kLive, kMock, kCache };

std::string_view ResponseSourceName(ResponseSource source);
ResponseSource ParseResponseSource(std::string_view name);

struct FeedbackRecord {
  std::string job_id;
  std::string essay_id;
  Condition condition = Condition::kImplicitOriginalM;
  std::string model_id;
  std::string response_text;
  std::string created_at;  // ISO-8601 UTC
  int attempt_count = 1;
  ResponseSource source = ResponseSource::kLive;

  bool operator==(const FeedbackRecord&) const = default;
};

// One JSON object per line, fixed key order.
std::string FeedbackRecordToJsonLine(const FeedbackRecord& record);
FeedbackRecord FeedbackRecordFromJson(std::string_view line);

struct ModelEndpointConfig {
  std::string base_url;
  std::string model;
  std::optional<double> temperature;  // unset: provider default, omitted from requests
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  std::string api_key_env;  // name of the environment variable holding the key

  void Validate() const;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Thread-safe. Throws Error(kTransport) on permanent failure.
  virtual FeedbackRecord Complete(const PromptJob& job) = 0;
};

// OpenAI-compatible chat completions: POST {base_url}/chat/completions with
// a single user message; reads choices[0].message.content.
class HttpChatBackend : public CompletionBackend {
 public:
  explicit HttpChatBackend(ModelEndpointConfig config, Sleeper sleeper = RealSleeper());
  FeedbackRecord Complete(const PromptJob& job) override;

  // Request body for `prompt` (exposed for tests).
  std::string RequestBody(std::string_view prompt) const;

 private:
  ModelEndpointConfig config_;
  Sleeper sleeper_;
};

enum class MockMode { kBiased, kUnbiased };

std::string_view MockModeName(MockMode mode);
MockMode ParseMockMode(std::string_view name);

// Deterministic stand-in for an LLM. The base feedback is phrased from a
// substream of `seed` keyed by the job id;
// biased mode appends a controlling block for female-direction cues and an
// autonomy-supportive block for male-direction cues. Cues come from the
// explicit condition, or for other conditions from lexicon term counts in the
// prompt.
FeedbackRecord MockComplete(const PromptJob& job, MockMode mode, uint64_t seed,
                            const GenderLexicon& lexicon);

class MockChatBackend : public CompletionBackend {
 public:
  MockChatBackend(MockMode mode, uint64_t seed, const GenderLexicon& lexicon)
      : mode_(mode), seed_(seed), lexicon_(lexicon) {}
  FeedbackRecord Complete(const PromptJob& job) override;
  size_t calls() const { return calls_.load(); }

 private:
  MockMode mode_;
  uint64_t seed_;
  const GenderLexicon& lexicon_;
  std::atomic<size_t> calls_{0};
};

// Append-only JSON-lines cache, one file per model under `directory`,
// indexed by job_id on load. Writes are serialized.
class ResponseCache {
 public:
  explicit ResponseCache(std::string directory);

  std::optional<FeedbackRecord> Lookup(const std::string& model_id, const std::string& job_id);
  void Append(const FeedbackRecord& record);
  std::string PathFor(const std::string& model_id) const;

 private:
  void LoadModel(const std::string& model_id);

  std::string directory_;
  std::mutex mutex_;
  std::map<std::string, std::unordered_map<std::string, FeedbackRecord>> index_;
};

struct BatchResult {
  std::vector<FeedbackRecord> records;  // plan order; only successful jobs
  std::vector<std::string> failed_job_ids;
  std::vector<std::string> failure_messages;
  size_t backend_calls = 0;
  size_t cache_hits = 0;
  bool ok() const { return failed_job_ids.empty(); }
};

using BackendMap = std::map<std::string, CompletionBackend*>;

// Cache hits return without backend calls; misses run with at most
// `parallelism` in flight; each completion is appended to the cache as soon as
// it finishes so an interrupted run resumes with only the remainder.
BatchResult RunBatch(const std::vector<PromptJob>& plan, const BackendMap& backends,
                     ResponseCache& cache, size_t parallelism);

}  // namespace feedbias

#endif  // FEEDBIAS_LLMCLIENT_H_
