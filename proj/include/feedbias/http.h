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

#ifndef FEEDBIAS_HTTP_H_
#define FEEDBIAS_HTTP_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace feedbias {

struct HttpResponse {
  int status = 0;  // 0 when the request never got a response
  std::string body;
  std::optional<double> retry_after_seconds;
  std::string transport_error;
};

// POSTs a JSON body to base_url + path. base_url may carry a path prefix
// ("https://api.example.com/v1"). Bearer auth is added when `bearer` is set.
HttpResponse PostJson(std::string_view base_url, std::string_view path, const std::string& body,
                      const std::string& bearer, std::chrono::milliseconds timeout);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper RealSleeper();

// Outcome of one attempt as judged by the caller.
struct AttemptOutcome {
  bool ok = false;
  bool retriable = false;
  std::optional<double> retry_after_seconds;
  std::string error;
};

struct RetryReport {
  bool ok = false;
  int attempts = 0;
  std::string last_error;
};

// Calls `attempt` until it succeeds, fails non-retriably, or max_retries
// retries are spent. Backoff doubles from initial_backoff with +-50% jitter
// drawn from `jitter_seed`; a Retry-After hint overrides the computed delay.
RetryReport CallWithRetries(const std::function<AttemptOutcome()>& attempt,
                            const RetryPolicy& policy, const Sleeper& sleeper,
                            uint64_t jitter_seed);

// Classifies an HTTP response: 2xx ok; 408, 409, 429, 5xx and transport
// failures retriable; other statuses fatal.
AttemptOutcome ClassifyHttp(const HttpResponse& response);

}  // namespace feedbias

#endif  // FEEDBIAS_HTTP_H_
