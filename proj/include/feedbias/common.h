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

#ifndef FEEDBIAS_COMMON_H_
#define FEEDBIAS_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace feedbias {

enum class ErrorKind {
  kValidation,  // bad input, config or precondition
  kIo,
  kTransport,   // remote endpoint failures after retries
  kNumeric,     // divergence, singular matrices
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorKind::kValidation, message);
}

enum class Direction { kM2F, kF2M };

std::string_view DirectionName(Direction direction);
Direction ParseDirection(std::string_view name);

// Reads a whole file; throws kIo on failure.
std::string ReadFile(const std::string& path);
// Writes atomically (temp file + rename); throws kIo on failure.
void WriteFile(const std::string& path, std::string_view contents);

// Renders `value` with `digits` significant digits ("%.*g").
std::string FormatSignificant(double value, int digits = 6);
// Rounds through the 6-significant-digit text representation.
double RoundSignificant(double value, int digits = 6);

}  // namespace feedbias

#endif  // FEEDBIAS_COMMON_H_
