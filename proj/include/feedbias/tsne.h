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

#ifndef FEEDBIAS_TSNE_H_
#define FEEDBIAS_TSNE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "feedbias/types.h"

namespace feedbias {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  int checkpoint_interval = 50;
  int trustworthiness_k = 5;
  uint64_t seed = 0;
};

struct TsnePoint {
  std::string essay_id;
  std::string group_label;
  double x = 0.0;
  double y = 0.0;
};

struct KlCheckpoint {
  int iteration = 0;  // 1-based count of completed iterations
  double kl = 0.0;
};

struct TsneResult {
  std::vector<TsnePoint> points;
  double kl_final = 0.0;
  std::vector<KlCheckpoint> kl_history;
  int trustworthiness_k = 5;
  double trustworthiness = 0.0;
  double perplexity = 0.0;
  int iterations = 0;
  uint64_t seed = 0;
  size_t jittered_duplicates = 0;
};

// Row i of P holds p_{j|i} before symmetrization. Each row's bandwidth is
// found by bisection (<= 50 steps) so its entropy equals log2(perplexity)
// within 1e-5 bits. Distances are squared Euclidean.
MatrixXd ConditionalAffinities(const MatrixXd& x, double perplexity);

// (P_{j|i} + P_{i|j}) / (2n); symmetric, zero diagonal, sums to 1.
MatrixXd PairwiseAffinities(const MatrixXd& x, double perplexity);

// Student-t (one degree of freedom) affinities of a low-dimensional layout.
MatrixXd StudentTAffinities(const MatrixXd& y);

// Sum of p log(p / max(q, 1e-12)) over p > 0.
double KlDivergence(const MatrixXd& p, const MatrixXd& q);

// d KL(P || Q(Y)) / dY = 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2).
MatrixXd TsneGradient(const MatrixXd& p, const MatrixXd& y);

// 1 - 2/(n k (2n - 3k - 1)) * sum over low-dim k-NN that are not high-dim
// k-NN of (high-dim rank - k). Ties in distance are broken by index.
double Trustworthiness(const MatrixXd& high, const MatrixXd& low, int k);

// Rows of `x` are points. Exact O(n^2) gradient descent with early
// exaggeration, momentum and gains. Identical rows get seeded 1e-10 jitter.
TsneResult TsneFit(const MatrixXd& x, const std::vector<std::string>& essay_ids,
                   const std::vector<std::string>& group_labels, const TsneConfig& config);

// Low-dimensional layout only (same algorithm as TsneFit).
MatrixXd TsneEmbed(const MatrixXd& x, const TsneConfig& config,
                   std::vector<KlCheckpoint>* history = nullptr);

}  // namespace feedbias

#endif  // FEEDBIAS_TSNE_H_
