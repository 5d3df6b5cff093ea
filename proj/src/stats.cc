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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "feedbias/distance.h"
#include "feedbias/permutation.h"
#include "feedbias/rng.h"

namespace feedbias {
namespace {

// Null statistics within this distance of the observed deviation count as ties.
constexpr double kTieTolerance = 1e-12;

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations

  // Chan et al. pairwise combination.
  void Merge(const Moments& other) {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    const double total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }
};

Moments MomentsOf(const double* values, size_t size) {
  Moments m;
  m.count = static_cast<double>(size);
  if (size == 0) return m;
  double sum = 0.0;
  for (size_t i = 0; i < size; ++i) sum += values[i];
  m.mean = sum / m.count;
  for (size_t i = 0; i < size; ++i) m.m2 += (values[i] - m.mean) * (values[i] - m.mean);
  return m;
}

RowMatrixXd Pool(const GroupEmbeddings& x, const GroupEmbeddings& y) {
  RowMatrixXd pool(x.size() + y.size(), x.dim());
  pool.topRows(x.size()) = x.vectors;
  pool.bottomRows(y.size()) = y.vectors;
  return pool;
}

// Symmetric distance matrix over the rows of `pool`; zero diagonal.
MatrixXd PoolDistances(const RowMatrixXd& pool, const DistanceMetric& metric, double* lambda_out) {
  const Eigen::Index m = pool.rows();
  MatrixXd distances = MatrixXd::Zero(m, m);
  if (metric.kind == MetricKind::kMahalanobis) {
    const MahalanobisModel<double> model(pool, metric.lambda);
    if (lambda_out) *lambda_out = model.lambda();
    RowMatrixXd whitened(m, pool.cols());
    for (Eigen::Index i = 0; i < m; ++i) whitened.row(i) = model.Whiten(pool.row(i).transpose()).transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        distances(i, j) = distances(j, i) = EuclideanDistance(whitened.row(i), whitened.row(j));
      }
    }
    return distances;
  }
  if (lambda_out) *lambda_out = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = metric.kind == MetricKind::kCosine
                           ? CosineDistance(pool.row(i), pool.row(j))
                           : EuclideanDistance(pool.row(i), pool.row(j));
      distances(i, j) = distances(j, i) = d;
    }
  }
  return distances;
}

}  // namespace

std::string_view MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kCosine:
      return "cosine";
    case MetricKind::kEuclidean:
      return "euclidean";
    case MetricKind::kMahalanobis:
      return "mahalanobis";
  }
  return "cosine";
}

MetricKind ParseMetric(std::string_view name) {
  if (name == "cosine") return MetricKind::kCosine;
  if (name == "euclidean") return MetricKind::kEuclidean;
  if (name == "mahalanobis") return MetricKind::kMahalanobis;
  Fail(ErrorKind::kValidation, "unknown metric '" + std::string(name) + "'");
}

double MahalanobisDistance(const EmbeddingVector& v, const std::vector<EmbeddingVector>& pooled,
                           double lambda) {
  Require(pooled.size() >= 2, "mahalanobis: pooled set needs at least 2 vectors");
  RowMatrixXd rows(static_cast<Eigen::Index>(pooled.size()), v.dim());
  for (size_t i = 0; i < pooled.size(); ++i) {
    Require(pooled[i].dim() == v.dim(), "mahalanobis: dim mismatch");
    rows.row(static_cast<Eigen::Index>(i)) = pooled[i].values.transpose();
  }
  const MahalanobisModel<double> model(rows, lambda);
  return model.DistanceToMean(v.values);
}

double Distance(const EmbeddingVector& a, const EmbeddingVector& b, MetricKind kind) {
  switch (kind) {
    case MetricKind::kCosine:
      return CosineDistance(a.values, b.values);
    case MetricKind::kEuclidean:
      return EuclideanDistance(a.values, b.values);
    case MetricKind::kMahalanobis:
      break;
  }
  Fail(ErrorKind::kValidation, "pairwise mahalanobis needs a pooled covariance");
}

VectorXd PairDistances(const GroupEmbeddings& x, const GroupEmbeddings& y,
                       const DistanceMetric& metric) {
  RequireAligned(x, y);
  Require(x.size() > 0, "paired distance needs n > 0");
  const Eigen::Index n = x.size();
  VectorXd out(n);
  if (metric.kind == MetricKind::kMahalanobis) {
    const RowMatrixXd pool = Pool(x, y);
    const MahalanobisModel<double> model(pool, metric.lambda);
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = EuclideanDistance(model.Whiten(x.vectors.row(i).transpose()),
                                 model.Whiten(y.vectors.row(i).transpose()));
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = metric.kind == MetricKind::kCosine ? CosineDistance(x.vectors.row(i), y.vectors.row(i))
                                                : EuclideanDistance(x.vectors.row(i), y.vectors.row(i));
  }
  return out;
}

double PairedMeanDistance(const GroupEmbeddings& x, const GroupEmbeddings& y,
                          const DistanceMetric& metric) {
  const VectorXd d = PairDistances(x, y, metric);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) sum += d[i];
  return sum / static_cast<double>(d.size());
}

Histogram MakeHistogram(const std::vector<double>& values, size_t bins) {
  Require(bins >= 1, "histogram needs at least one bin");
  Histogram h;
  if (values.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    h.bin_edges = {lo, hi};
    h.counts = {values.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  h.bin_edges.resize(bins + 1);
  for (size_t k = 0; k < bins; ++k) h.bin_edges[k] = lo + width * static_cast<double>(k);
  h.bin_edges[bins] = hi;
  for (const double v : values) {
    size_t k = static_cast<size_t>((v - lo) / width);
    if (k >= bins) k = bins - 1;
    ++h.counts[k];
  }
  return h;
}

PermutationResult PermutationTestFromDistances(const MatrixXd& distances,
                                               const PermutationOptions& options) {
  Require(distances.rows() == distances.cols() && distances.rows() % 2 == 0,
          "permutation test needs a square 2n x 2n distance matrix");
  const size_t n = static_cast<size_t>(distances.rows() / 2);
  const size_t b_total = options.permutations;
  Require(n >= 2, "permutation test needs n >= 2 per group");
  Require(b_total >= 100, "permutation test needs B >= 100");
  Require(distances.allFinite(), "distance matrix has non-finite entries");

  PermutationResult result;
  result.n = n;
  result.permutations = b_total;
  result.seed = options.seed;

  std::vector<double> observed(n);
  double observed_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    observed[i] = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + i));
    observed_sum += observed[i];
  }
  result.t_obs = observed_sum / static_cast<double>(n);

  std::vector<double> null_stats(b_total);
  std::vector<Moments> null_moments(b_total);
  const auto run_range = [&](size_t begin, size_t end) {
    std::vector<size_t> perm(2 * n);
    std::vector<double> pair(n);
    for (size_t b = begin; b < end; ++b) {
      std::iota(perm.begin(), perm.end(), size_t{0});
      SeededRng rng(options.seed, b);
      rng.Shuffle(std::span<size_t>(perm));
      double sum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        pair[i] = distances(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[n + i]));
        sum += pair[i];
      }
      null_stats[b] = sum / static_cast<double>(n);
      null_moments[b] = MomentsOf(pair.data(), n);
    }
  };
  const size_t threads = std::max<size_t>(1, std::min(options.threads, b_total));
  if (threads == 1) {
    run_range(0, b_total);
  } else {
    std::vector<std::jthread> pool;
    const size_t chunk = (b_total + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
      const size_t begin = t * chunk, end = std::min(b_total, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  // Order-fixed reductions.
  const Moments stat_moments = MomentsOf(null_stats.data(), b_total);
  result.t_perm_mean = stat_moments.mean;
  result.t_perm_sd = b_total > 1 ? std::sqrt(stat_moments.m2 / static_cast<double>(b_total - 1)) : 0.0;

  const double observed_dev = std::abs(result.t_obs - result.t_perm_mean);
  size_t extreme = 0;
  for (const double t : null_stats) {
    if (std::abs(t - result.t_perm_mean) >= observed_dev - kTieTolerance) ++extreme;
  }
  result.p_two_tailed = static_cast<double>(1 + extreme) / static_cast<double>(b_total + 1);

  Moments null_pairs;
  for (const Moments& m : null_moments) null_pairs.Merge(m);
  const Moments obs = MomentsOf(observed.data(), n);
  const double dof = obs.count + null_pairs.count - 2.0;
  const double pooled_sd = std::sqrt((obs.m2 + null_pairs.m2) / dof);
  result.d_pairs = pooled_sd > 0.0 ? (obs.mean - null_pairs.mean) / pooled_sd : 0.0;
  result.z_perm =
      result.t_perm_sd > 0.0 ? (result.t_obs - result.t_perm_mean) / result.t_perm_sd : 0.0;

  result.histogram = MakeHistogram(null_stats, options.histogram_bins);
  result.null_statistics = std::move(null_stats);
  return result;
}

PermutationResult PermutationTest(const GroupEmbeddings& x, const GroupEmbeddings& y,
                                  const DistanceMetric& metric, const PermutationOptions& options) {
  RequireAligned(x, y);
  Require(x.size() >= 2, "permutation test needs n >= 2 per group");
  Require(options.permutations >= 100, "permutation test needs B >= 100");
  double lambda = 0.0;
  const MatrixXd distances = PoolDistances(Pool(x, y), metric, &lambda);
  PermutationResult result = PermutationTestFromDistances(distances, options);
  result.metric = metric.kind;
  result.lambda = lambda;
  return result;
}

std::string_view EffectSizeBand(double d) {
  const double magnitude = std::abs(d);
  if (magnitude >= 0.8) return "large";
  if (magnitude >= 0.5) return "medium";
  if (magnitude >= 0.2) return "small";
  return "negligible";
}

}  // namespace feedbias
