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

#ifndef FEEDBIAS_RNG_H_
#define FEEDBIAS_RNG_H_

#include <cstdint>
#include <random>
#include <span>

namespace feedbias {

// SplitMix64 finalizer. Used to derive independent substream seeds from
// (seed, stream index) so parallel work is independent of scheduling.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t SubstreamSeed(uint64_t seed, uint64_t stream) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632be59bd9b4e019ULL));
}

// Seeded generator: std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Distributions are implemented here rather than via <random>
// because the standard distributions are implementation-defined.
class SeededRng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+splitmix64";

  explicit SeededRng(uint64_t seed) : engine_(seed) {}
  SeededRng(uint64_t seed, uint64_t stream) : engine_(SubstreamSeed(seed, stream)) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound), unbiased (Lemire's multiply + reject).
  uint64_t Below(uint64_t bound);

  // Uniform real in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second variate.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace feedbias

#endif  // FEEDBIAS_RNG_H_
