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

#include "feedbias/tsne.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include "feedbias/common.h"
#include "feedbias/rng.h"

namespace feedbias {
namespace {

constexpr int kMaxBisectionSteps = 50;
constexpr double kEntropyToleranceBits = 1e-5;
constexpr double kQFloor = 1e-12;
constexpr double kDuplicateJitter = 1e-10;
constexpr double kMinGain = 0.01;

MatrixXd SquaredDistances(const MatrixXd& x) {
  const Eigen::Index n = x.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
  }
  return d;
}

void CheckAffinityInput(const MatrixXd& x, double perplexity) {
  const Eigen::Index n = x.rows();
  Require(n >= 4, "t-SNE needs at least 4 points");
  Require(x.allFinite(), "t-SNE input has non-finite values");
  Require(perplexity > 1.0, "perplexity must be > 1");
  Require(perplexity < static_cast<double>(n - 1) / 3.0,
          "perplexity " + std::to_string(perplexity) + " is infeasible for n = " +
              std::to_string(n) + " (needs perplexity < (n - 1) / 3)");
}

// Entropy (nats) and probabilities for one row at precision beta.
double RowEntropy(const std::vector<double>& shifted, double beta, std::vector<double>& probs) {
  double sum = 0.0, weighted = 0.0;
  for (size_t j = 0; j < shifted.size(); ++j) {
    probs[j] = std::exp(-beta * shifted[j]);
    sum += probs[j];
    weighted += shifted[j] * probs[j];
  }
  for (double& p : probs) p /= sum;
  return std::log(sum) + beta * weighted / sum;
}

// Returns an identical-row-free copy; duplicates after the first occurrence
// move by a seeded random vector of norm 1e-10.
MatrixXd JitterDuplicates(const MatrixXd& x, uint64_t seed, size_t* count) {
  MatrixXd out = x;
  std::unordered_map<std::string, Eigen::Index> seen;
  SeededRng rng(seed, /*stream=*/0xd0b1e);
  size_t jittered = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::string key(static_cast<size_t>(x.cols()) * sizeof(double), '\0');
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double v = x(i, c) == 0.0 ? 0.0 : x(i, c);  // fold -0
      std::memcpy(key.data() + c * sizeof(double), &v, sizeof(double));
    }
    if (seen.emplace(std::move(key), i).second) continue;
    VectorXd direction(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) direction[c] = rng.Normal();
    out.row(i) += (kDuplicateJitter / direction.norm()) * direction.transpose();
    ++jittered;
  }
  if (count) *count = jittered;
  return out;
}

}  // namespace

MatrixXd ConditionalAffinities(const MatrixXd& x, double perplexity) {
  CheckAffinityInput(x, perplexity);
  const Eigen::Index n = x.rows();
  const MatrixXd d = SquaredDistances(x);
  const double target = std::log(perplexity);
  const double tolerance = kEntropyToleranceBits * std::log(2.0);
  const size_t k_scale = std::min<size_t>(static_cast<size_t>(n - 2),
                                          static_cast<size_t>(std::ceil(perplexity)));

  MatrixXd p = MatrixXd::Zero(n, n);
  std::vector<double> shifted(static_cast<size_t>(n - 1));
  std::vector<double> probs(shifted.size());
  std::vector<double> scratch;
  for (Eigen::Index i = 0; i < n; ++i) {
    double min_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      shifted[static_cast<size_t>(k++)] = d(i, j);
      min_d = std::min(min_d, d(i, j));
    }
    for (double& v : shifted) v -= min_d;

    // Initial precision from the distance scale of the ~perplexity-th neighbor.
    scratch = shifted;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k_scale),
                     scratch.end());
    double scale = scratch[k_scale];
    if (!(scale > 0.0)) {
      scale = 0.0;
      for (const double v : shifted) scale = std::max(scale, v);
    }
    double beta = scale > 0.0 ? 1.0 / scale : 1.0;
    double beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();

    double entropy = RowEntropy(shifted, beta, probs);
    for (int step = 0; step < kMaxBisectionSteps && std::abs(entropy - target) > tolerance; ++step) {
      if (entropy > target) {
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = 0.5 * (beta + beta_lo);
      }
      entropy = RowEntropy(shifted, beta, probs);
    }
    for (Eigen::Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      p(i, j) = probs[static_cast<size_t>(k++)];
    }
  }
  return p;
}

MatrixXd PairwiseAffinities(const MatrixXd& x, double perplexity) {
  const MatrixXd conditional = ConditionalAffinities(x, perplexity);
  MatrixXd p = (conditional + conditional.transpose()) / (2.0 * static_cast<double>(x.rows()));
  p.diagonal().setZero();
  return p;
}

MatrixXd StudentTAffinities(const MatrixXd& y) {
  const Eigen::Index n = y.rows();
  MatrixXd q = MatrixXd::Zero(n, n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      q(i, j) = q(j, i) = w;
      sum += 2.0 * w;
    }
  }
  return q / sum;
}

double KlDivergence(const MatrixXd& p, const MatrixXd& q) {
  Require(p.rows() == q.rows() && p.cols() == q.cols(), "KL divergence: shape mismatch");
  double kl = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double pij = p(i, j);
      if (pij > 0.0) kl += pij * std::log(pij / std::max(q(i, j), kQFloor));
    }
  }
  return std::max(kl, 0.0);
}

MatrixXd TsneGradient(const MatrixXd& p, const MatrixXd& y) {
  const Eigen::Index n = y.rows();
  Require(p.rows() == n && p.cols() == n, "t-SNE gradient: shape mismatch");
  MatrixXd num = MatrixXd::Zero(n, n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      num(i, j) = num(j, i) = w;
      sum += 2.0 * w;
    }
  }
  MatrixXd grad = MatrixXd::Zero(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double coefficient = (p(i, j) - num(i, j) / sum) * num(i, j);
      grad.row(i) += coefficient * (y.row(i) - y.row(j));
    }
  }
  return 4.0 * grad;
}

double Trustworthiness(const MatrixXd& high, const MatrixXd& low, int k) {
  const Eigen::Index n = high.rows();
  Require(low.rows() == n, "trustworthiness: row count mismatch");
  Require(k >= 1 && 2 * static_cast<Eigen::Index>(k) < n,
          "trustworthiness: k must satisfy 1 <= k < n/2");
  const MatrixXd dh = SquaredDistances(high);
  const MatrixXd dl = SquaredDistances(low);
  std::vector<Eigen::Index> order;
  std::vector<Eigen::Index> rank_high(static_cast<size_t>(n));
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto sorted_neighbors = [&](const MatrixXd& d) {
      order.clear();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) order.push_back(j);
      }
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
      });
    };
    sorted_neighbors(dh);
    for (size_t r = 0; r < order.size(); ++r) rank_high[static_cast<size_t>(order[r])] = static_cast<Eigen::Index>(r + 1);
    sorted_neighbors(dl);
    for (int r = 0; r < k; ++r) {
      const Eigen::Index rank = rank_high[static_cast<size_t>(order[static_cast<size_t>(r)])];
      if (rank > k) penalty += static_cast<double>(rank - k);
    }
  }
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

MatrixXd TsneEmbed(const MatrixXd& x, const TsneConfig& config, std::vector<KlCheckpoint>* history) {
  CheckAffinityInput(x, config.perplexity);
  Require(config.iterations > 0, "t-SNE iterations must be positive");
  Require(config.checkpoint_interval > 0, "checkpoint interval must be positive");
  const Eigen::Index n = x.rows();
  const MatrixXd p = PairwiseAffinities(x, config.perplexity);

  SeededRng rng(config.seed, /*stream=*/0x75e);
  MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < 2; ++c) y(i, c) = 1e-4 * rng.Normal();
  }
  MatrixXd update = MatrixXd::Zero(n, 2);
  MatrixXd gains = MatrixXd::Ones(n, 2);

  for (int it = 0; it < config.iterations; ++it) {
    const bool exaggerate = it < config.exaggeration_iterations;
    const MatrixXd grad =
        TsneGradient(exaggerate ? MatrixXd(p * config.early_exaggeration) : p, y);
    const double momentum =
        it < config.momentum_switch_iteration ? config.initial_momentum : config.final_momentum;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2;
        gains(i, c) = std::max(gains(i, c), kMinGain);
        update(i, c) = momentum * update(i, c) - config.learning_rate * gains(i, c) * grad(i, c);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();
    if (!y.allFinite()) {
      Fail(ErrorKind::kNumeric, "t-SNE diverged to non-finite coordinates at iteration " +
                                    std::to_string(it + 1));
    }
    if (history && (it + 1) % config.checkpoint_interval == 0) {
      history->push_back({it + 1, KlDivergence(p, StudentTAffinities(y))});
    }
  }
  return y;
}

TsneResult TsneFit(const MatrixXd& x, const std::vector<std::string>& essay_ids,
                   const std::vector<std::string>& group_labels, const TsneConfig& config) {
  const auto n = static_cast<size_t>(x.rows());
  Require(essay_ids.size() == n && group_labels.size() == n,
          "t-SNE labels must match the number of input vectors");
  TsneResult result;
  const MatrixXd input = JitterDuplicates(x, config.seed, &result.jittered_duplicates);
  const MatrixXd y = TsneEmbed(input, config, &result.kl_history);
  const MatrixXd p = PairwiseAffinities(input, config.perplexity);
  result.kl_final = KlDivergence(p, StudentTAffinities(y));
  result.trustworthiness_k = config.trustworthiness_k;
  result.trustworthiness = Trustworthiness(input, y, config.trustworthiness_k);
  result.perplexity = config.perplexity;
  result.iterations = config.iterations;
  result.seed = config.seed;
  result.points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    result.points.push_back({essay_ids[i], group_labels[i], y(static_cast<Eigen::Index>(i), 0),
                             y(static_cast<Eigen::Index>(i), 1)});
  }
  return result;
}

}  // namespace feedbias
