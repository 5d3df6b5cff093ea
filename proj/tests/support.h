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

#ifndef FEEDBIAS_TESTS_SUPPORT_H_
#define FEEDBIAS_TESTS_SUPPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "feedbias/config.h"
#include "feedbias/corpus.h"
#include "feedbias/embedder.h"
#include "feedbias/types.h"

namespace feedbias::testing {

// Absolute path of a file in the source tree.
std::string SourcePath(const std::string& relative);

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string File(const std::string& name) const;

 private:
  std::string path_;
};

// n i.i.d. N(0, I) rows in `dim` dimensions, as a group sorted by id.
GroupEmbeddings GaussianGroup(const std::string& label, size_t n, size_t dim, uint64_t seed,
                              uint64_t stream);

// Three well-separated Gaussian clusters (centres 10 apart, unit spread).
struct ClusterFixture {
  MatrixXd points;
  std::vector<int> cluster;
};
ClusterFixture ThreeClusters(size_t n = 60, size_t dim = 16, uint64_t seed = 11);

// Exact two-tailed p over all (2n)! orderings of the pooled indices, with the
// same first-n / last-n positional pairing as the Monte Carlo test.
double ExhaustivePValue(const MatrixXd& distances);

// CSV corpus of `m_count` male-marked and `f_count` female-marked essays of
// at least 20 tokens each; ids m0000.., f0000...
std::string SyntheticCorpusCsv(size_t m_count, size_t f_count, uint64_t seed);

// Config for a mock run over `corpus_path` writing under `run_root`.
ExperimentConfig MockConfig(const std::string& corpus_path, const std::string& run_root,
                            uint64_t seed, MockMode mode);

}  // namespace feedbias::testing

#endif  // FEEDBIAS_TESTS_SUPPORT_H_
