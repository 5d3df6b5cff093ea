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

#ifndef FEEDBIAS_PERMUTATION_H_
#define FEEDBIAS_PERMUTATION_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/distance.h"
#include "feedbias/embedder.h"

namespace feedbias {

struct Histogram {
  std::vector<double> bin_edges;  // counts.size() + 1 edges
  std::vector<uint64_t> counts;

  bool operator==(const Histogram&) const = default;
};

// Fixed-width bins over [min, max] of `values`; the last bin is closed. All
// values equal gives a single bin [v, v].
Histogram MakeHistogram(const std::vector<double>& values, size_t bins);

struct PermutationResult {
  MetricKind metric = MetricKind::kCosine;
  double lambda = 0.0;  // effective Mahalanobis regularization, 0 otherwise
  size_t n = 0;
  size_t permutations = 0;  // B
  double t_obs = 0.0;
  double t_perm_mean = 0.0;
  double t_perm_sd = 0.0;
  double p_two_tailed = 1.0;
  double d_pairs = 0.0;
  double z_perm = 0.0;
  uint64_t seed = 0;
  Histogram histogram;
  std::vector<double> null_statistics;  // t_b, b = 0..B-1 (not serialized)

  bool operator==(const PermutationResult&) const = default;
};

struct PermutationOptions {
  size_t permutations = 5000;
  uint64_t seed = 0;
  size_t histogram_bins = 50;
  size_t threads = 1;  // results do not depend on this
};

// Two-tailed permutation test on the mean paired distance. Each iteration b
// shuffles the pooled 2n vectors with its own substream SeededRng(seed, b);
// the first n become pseudo-X and the last n pseudo-Y, paired by position.
// p = (1 + #{b : |t_b - T| >= |t_obs - T|}) / (B + 1) with T the null mean.
PermutationResult PermutationTest(const GroupEmbeddings& x, const GroupEmbeddings& y,
                                  const DistanceMetric& metric, const PermutationOptions& options);

// Same test on a precomputed symmetric 2n x 2n distance matrix whose first n
// rows are X and last n rows Y (pair i is (i, n + i)).
PermutationResult PermutationTestFromDistances(const MatrixXd& distances,
                                               const PermutationOptions& options);

// Cohen's d band: "negligible" (< 0.2), "small", "medium" (>= 0.5), "large" (>= 0.8).
std::string_view EffectSizeBand(double d);

}  // namespace feedbias

#endif  // FEEDBIAS_PERMUTATION_H_
