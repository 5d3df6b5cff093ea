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

#include "feedbias/http.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "httplib.h"

#include "feedbias/common.h"
#include "feedbias/rng.h"

namespace feedbias {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl Split(std::string_view base_url) {
  const size_t scheme_end = base_url.find("://");
  Require(scheme_end != std::string_view::npos, "base_url needs a scheme: " + std::string(base_url));
  const size_t path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(base_url);
  } else {
    out.origin = std::string(base_url.substr(0, path_start));
    out.prefix = std::string(base_url.substr(path_start));
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

}  // namespace

HttpResponse PostJson(std::string_view base_url, std::string_view path, const std::string& body,
                      const std::string& bearer, std::chrono::milliseconds timeout) {
  const SplitUrl url = Split(base_url);
  HttpResponse response;
  try {
    httplib::Client client(url.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    const auto result =
        client.Post(url.prefix + std::string(path), headers, body, "application/json");
    if (!result) {
      response.transport_error = httplib::to_string(result.error());
      return response;
    }
    response.status = result->status;
    response.body = result->body;
    if (result->has_header("Retry-After")) {
      const std::string value = result->get_header_value("Retry-After");
      char* end = nullptr;
      const double seconds_hint = std::strtod(value.c_str(), &end);
      if (end != value.c_str() && std::isfinite(seconds_hint) && seconds_hint >= 0) {
        response.retry_after_seconds = seconds_hint;
      }
    }
  } catch (const std::exception& e) {
    response.status = 0;
    response.transport_error = e.what();
  }
  return response;
}

Sleeper RealSleeper() {
  return [](std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); };
}

AttemptOutcome ClassifyHttp(const HttpResponse& response) {
  AttemptOutcome outcome;
  if (response.status == 0) {
    outcome.retriable = true;
    outcome.error = "transport error: " + response.transport_error;
    return outcome;
  }
  if (response.status >= 200 && response.status < 300) {
    outcome.ok = true;
    return outcome;
  }
  outcome.retry_after_seconds = response.retry_after_seconds;
  outcome.retriable = response.status == 408 || response.status == 409 ||
                      response.status == 429 || response.status >= 500;
  outcome.error = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
  return outcome;
}

RetryReport CallWithRetries(const std::function<AttemptOutcome()>& attempt,
                            const RetryPolicy& policy, const Sleeper& sleeper,
                            uint64_t jitter_seed) {
  Require(policy.max_retries >= 0 && policy.max_retries <= 10, "max_retries must be in [0, 10]");
  SeededRng jitter(jitter_seed, /*stream=*/0x7e7);
  RetryReport report;
  for (int retry = 0;; ++retry) {
    ++report.attempts;
    const AttemptOutcome outcome = attempt();
    if (outcome.ok) {
      report.ok = true;
      return report;
    }
    report.last_error = outcome.error;
    if (!outcome.retriable || retry >= policy.max_retries) return report;
    std::chrono::milliseconds delay;
    if (outcome.retry_after_seconds) {
      delay = std::chrono::milliseconds(
          static_cast<int64_t>(std::min(*outcome.retry_after_seconds, 120.0) * 1000.0));
    } else {
      const double base = static_cast<double>(policy.initial_backoff.count()) * std::ldexp(1.0, retry);
      const double capped = std::min(base, static_cast<double>(policy.max_backoff.count()));
      delay = std::chrono::milliseconds(static_cast<int64_t>(capped * (0.5 + jitter.Uniform())));
    }
    sleeper(delay);
  }
}

}  // namespace feedbias
