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

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "feedbias/distance.h"
#include "feedbias/permutation.h"
#include "support.h"

namespace feedbias {
namespace {

EmbeddingVector Vec(std::initializer_list<double> values, bool normalized = false) {
  EmbeddingVector v;
  v.values.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double value : values) v.values[i++] = value;
  v.normalized = normalized;
  return v;
}

GroupEmbeddings Group(const std::string& label, const std::vector<std::vector<double>>& rows) {
  GroupEmbeddings g;
  g.group_label = label;
  g.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    g.essay_ids.push_back("e" + std::to_string(i));
    for (size_t c = 0; c < rows[i].size(); ++c) {
      g.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return g;
}

// Mahalanobis oracle in 2-D: sample covariance of the pooled points, explicit
// 2x2 inverse.
double Mahalanobis2d(const std::vector<std::array<double, 2>>& pooled, std::array<double, 2> a,
                     std::array<double, 2> b, double lambda) {
  const double n = static_cast<double>(pooled.size());
  double mx = 0, my = 0;
  for (const auto& p : pooled) {
    mx += p[0];
    my += p[1];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pooled) {
    sxx += (p[0] - mx) * (p[0] - mx);
    sxy += (p[0] - mx) * (p[1] - my);
    syy += (p[1] - my) * (p[1] - my);
  }
  sxx = sxx / (n - 1) + lambda;
  syy = syy / (n - 1) + lambda;
  sxy /= (n - 1);
  const double det = sxx * syy - sxy * sxy;
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  const double q = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
  return std::sqrt(q);
}

TEST(Distance, CosineHandCase) {
  EXPECT_NEAR(Distance(Vec({1, 1}), Vec({1, 0}), MetricKind::kCosine), 1 - std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(Distance(Vec({1, 0}), Vec({-1, 0}), MetricKind::kCosine), 2.0, 1e-12);
  EXPECT_NEAR(Distance(Vec({0, 3}), Vec({0, 1}), MetricKind::kCosine), 0.0, 1e-12);
}

TEST(Distance, EuclideanHandCase) {
  EXPECT_NEAR(Distance(Vec({0, 0}), Vec({3, 4}), MetricKind::kEuclidean), 5.0, 1e-12);
}

TEST(Distance, Errors) {
  EXPECT_THROW(Distance(Vec({0, 0}), Vec({1, 0}), MetricKind::kCosine), Error);
  EXPECT_THROW(Distance(Vec({1, 0}), Vec({1, 0, 0}), MetricKind::kEuclidean), Error);
  EXPECT_THROW(ParseMetric("manhattan"), Error);
  EXPECT_EQ(ParseMetric("mahalanobis"), MetricKind::kMahalanobis);
  EXPECT_EQ(MetricName(MetricKind::kCosine), "cosine");
}

TEST(DistanceProperty, SquaredEuclideanIsTwiceCosineOnUnitVectors) {
  const GroupEmbeddings g = testing::GaussianGroup("M", 50, 12, 3, 1);
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    EmbeddingVector a{g.vectors.row(i).transpose().normalized(), true};
    EmbeddingVector b{g.vectors.row(i + 1).transpose().normalized(), true};
    const double e = Distance(a, b, MetricKind::kEuclidean);
    EXPECT_NEAR(e * e, 2.0 * Distance(a, b, MetricKind::kCosine), 1e-12);
  }
}

TEST(Mahalanobis, MatchesClosedFormInverse) {
  const std::vector<std::array<double, 2>> pooled = {{0, 0}, {1, 2}, {3, 1}, {1, 1}};
  std::vector<EmbeddingVector> vectors;
  for (const auto& p : pooled) vectors.push_back(Vec({p[0], p[1]}));
  for (const double lambda : {0.0, 0.5}) {
    // Distance to the pooled mean.
    const double expected = Mahalanobis2d(pooled, {3, 1}, {1.25, 1.0}, lambda);
    EXPECT_NEAR(MahalanobisDistance(Vec({3, 1}), vectors, lambda), expected, 1e-12) << lambda;
  }
  const GroupEmbeddings x = Group("M", {{0, 0}, {1, 2}});
  const GroupEmbeddings y = Group("F", {{3, 1}, {1, 1}});
  const double expected = (Mahalanobis2d(pooled, {0, 0}, {3, 1}, 0.0) +
                           Mahalanobis2d(pooled, {1, 2}, {1, 1}, 0.0)) / 2;
  EXPECT_NEAR(PairedMeanDistance(x, y, DistanceMetric::Mahalanobis(0.0)), expected, 1e-12);
}

TEST(Mahalanobis, AxisCrossMatchesInverseAndHandValue) {
  const std::vector<std::array<double, 2>> pooled = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<EmbeddingVector> vectors;
  for (const auto& p : pooled) vectors.push_back(Vec({p[0], p[1]}));
  const double d = MahalanobisDistance(Vec({1, 0}), vectors, 0.0);
  EXPECT_NEAR(d, Mahalanobis2d(pooled, {1, 0}, {0, 0}, 0.0), 1e-12);
  EXPECT_NEAR(d, std::sqrt(1.5), 1e-12);
}

TEST(Mahalanobis, SymmetricSampleGivesHandValue) {
  // Covariance of (0,0),(2,0),(0,2),(2,2) is (4/3) I; a unit step gives sqrt(3/4).
  std::vector<EmbeddingVector> pooled = {Vec({0, 0}), Vec({2, 0}), Vec({0, 2}), Vec({2, 2})};
  EXPECT_NEAR(MahalanobisDistance(Vec({2, 1}), pooled, 0.0), std::sqrt(0.75), 1e-12);
}

TEST(Mahalanobis, SingularWithoutRegularizationFails) {
  std::vector<EmbeddingVector> pooled = {Vec({0, 0, 0}), Vec({1, 1, 1})};
  EXPECT_THROW(MahalanobisDistance(Vec({1, 0, 0}), pooled, 0.0), Error);
  EXPECT_NO_THROW(MahalanobisDistance(Vec({1, 0, 0}), pooled, 0.1));
}

TEST(Mahalanobis, DefaultLambdaIsTenthOfMeanVariance) {
  const GroupEmbeddings g = testing::GaussianGroup("M", 30, 4, 9, 1);
  const MahalanobisModel<double> model(g.vectors, -1.0);
  const RowMatrixXd centered = g.vectors.rowwise() - g.vectors.colwise().mean();
  const double trace = centered.array().square().sum() / 29.0;
  EXPECT_NEAR(model.lambda(), 0.1 * trace / 4.0, 1e-12);
}

TEST(PairedMean, HandCase) {
  const GroupEmbeddings x = Group("M", {{1, 0}, {0, 1}});
  const GroupEmbeddings y = Group("F", {{0, 1}, {0, 1}});
  EXPECT_NEAR(PairedMeanDistance(x, y, DistanceMetric::Cosine()), 0.5, 1e-12);
  EXPECT_NEAR(PairedMeanDistance(x, y, DistanceMetric::Euclidean()), std::sqrt(2.0) / 2, 1e-12);
}

TEST(PairedMean, RequiresAlignment) {
  const GroupEmbeddings x = Group("M", {{1, 0}, {0, 1}});
  const GroupEmbeddings y = Group("F", {{0, 1}});
  EXPECT_THROW(PairedMeanDistance(x, y, DistanceMetric::Cosine()), Error);
}

TEST(Histogram, HandCase) {
  const Histogram h = MakeHistogram({0, 1, 2, 3, 4}, 2);
  EXPECT_EQ(h.bin_edges, (std::vector<double>{0, 2, 4}));
  EXPECT_EQ(h.counts, (std::vector<uint64_t>{2, 3}));
  const Histogram flat = MakeHistogram({1.5, 1.5}, 10);
  EXPECT_EQ(flat.counts, (std::vector<uint64_t>{2}));
  EXPECT_THROW(MakeHistogram({1.0}, 0), Error);
}

MatrixXd EuclideanMatrix(const MatrixXd& points) {
  const Eigen::Index m = points.rows();
  MatrixXd d(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = (points.row(i) - points.row(j)).norm();
  }
  return d;
}

TEST(Permutation, MatchesExhaustiveOracle) {
  for (const uint64_t seed : {1u, 2u, 3u}) {
    const GroupEmbeddings g = testing::GaussianGroup("M", 6, 3, seed, 5);
    MatrixXd points = g.vectors;
    points.bottomRows(3).array() += 0.4 * static_cast<double>(seed);
    const MatrixXd d = EuclideanMatrix(points);
    const double exact = testing::ExhaustivePValue(d);
    PermutationOptions options;
    options.permutations = 40000;
    options.seed = seed;
    const PermutationResult r = PermutationTestFromDistances(d, options);
    EXPECT_NEAR(r.p_two_tailed, exact, 0.015) << "seed " << seed;
  }
}

TEST(Permutation, PValueFollowsFormula) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 20, 8, 4, 1);
  const GroupEmbeddings y = testing::GaussianGroup("F", 20, 8, 4, 2);
  PermutationOptions options;
  options.permutations = 999;
  options.seed = 17;
  const PermutationResult r = PermutationTest(x, y, DistanceMetric::Cosine(), options);
  ASSERT_EQ(r.null_statistics.size(), 999u);
  const double mean =
      std::accumulate(r.null_statistics.begin(), r.null_statistics.end(), 0.0) / 999.0;
  EXPECT_NEAR(r.t_perm_mean, mean, 1e-12);
  size_t extreme = 0;
  for (const double t : r.null_statistics) {
    if (std::abs(t - mean) >= std::abs(r.t_obs - mean) - 1e-12) ++extreme;
  }
  EXPECT_DOUBLE_EQ(r.p_two_tailed, (1.0 + extreme) / 1000.0);
  double ss = 0.0;
  for (const double t : r.null_statistics) ss += (t - mean) * (t - mean);
  EXPECT_NEAR(r.t_perm_sd, std::sqrt(ss / 998.0), 1e-12);
  EXPECT_NEAR(r.z_perm, (r.t_obs - mean) / r.t_perm_sd, 1e-9);
  EXPECT_NEAR(r.t_obs, PairedMeanDistance(x, y, DistanceMetric::Cosine()), 1e-12);
}

TEST(Permutation, HistogramCoversNullDistribution) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 10, 4, 4, 1);
  const GroupEmbeddings y = testing::GaussianGroup("F", 10, 4, 4, 2);
  PermutationOptions options;
  options.permutations = 500;
  options.histogram_bins = 25;
  const PermutationResult r = PermutationTest(x, y, DistanceMetric::Euclidean(), options);
  ASSERT_EQ(r.histogram.counts.size(), 25u);
  ASSERT_EQ(r.histogram.bin_edges.size(), 26u);
  EXPECT_EQ(std::accumulate(r.histogram.counts.begin(), r.histogram.counts.end(), uint64_t{0}), 500u);
  const auto [lo, hi] = std::minmax_element(r.null_statistics.begin(), r.null_statistics.end());
  EXPECT_EQ(r.histogram.bin_edges.front(), *lo);
  EXPECT_EQ(r.histogram.bin_edges.back(), *hi);
}

TEST(Permutation, ThreadCountDoesNotChangeResult) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 15, 6, 8, 1);
  const GroupEmbeddings y = testing::GaussianGroup("F", 15, 6, 8, 2);
  PermutationOptions options;
  options.permutations = 1000;
  options.seed = 5;
  options.threads = 1;
  const PermutationResult one = PermutationTest(x, y, DistanceMetric::Mahalanobis(), options);
  options.threads = 4;
  const PermutationResult four = PermutationTest(x, y, DistanceMetric::Mahalanobis(), options);
  EXPECT_EQ(one, four);
}

TEST(Permutation, SeedDeterminesNull) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 8, 4, 8, 1);
  const GroupEmbeddings y = testing::GaussianGroup("F", 8, 4, 8, 2);
  PermutationOptions options;
  options.permutations = 200;
  options.seed = 1;
  const PermutationResult a = PermutationTest(x, y, DistanceMetric::Cosine(), options);
  EXPECT_EQ(a, PermutationTest(x, y, DistanceMetric::Cosine(), options));
  options.seed = 2;
  EXPECT_NE(a.null_statistics, PermutationTest(x, y, DistanceMetric::Cosine(), options).null_statistics);
}

TEST(Permutation, NearIdenticalPairsGiveMinimalP) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 30, 8, 2, 1);
  GroupEmbeddings y = x;
  y.vectors += 0.01 * testing::GaussianGroup("F", 30, 8, 2, 2).vectors;
  PermutationOptions options;
  options.permutations = 999;
  const PermutationResult r = PermutationTest(x, y, DistanceMetric::Euclidean(), options);
  EXPECT_DOUBLE_EQ(r.p_two_tailed, 1.0 / 1000.0);
  EXPECT_LT(r.d_pairs, -0.8);
  EXPECT_EQ(EffectSizeBand(r.d_pairs), "large");
}

TEST(PermutationProperty, PValueInRangeAndTObsSymmetric) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const GroupEmbeddings x = testing::GaussianGroup("M", 6, 3, seed, 1);
    const GroupEmbeddings y = testing::GaussianGroup("F", 6, 3, seed, 2);
    PermutationOptions options;
    options.permutations = 100;
    options.seed = seed;
    const PermutationResult xy = PermutationTest(x, y, DistanceMetric::Cosine(), options);
    const PermutationResult yx = PermutationTest(y, x, DistanceMetric::Cosine(), options);
    EXPECT_GE(xy.p_two_tailed, 1.0 / 101.0);
    EXPECT_LE(xy.p_two_tailed, 1.0);
    EXPECT_NEAR(xy.t_obs, yx.t_obs, 1e-12);
  }
}

TEST(Permutation, Errors) {
  const GroupEmbeddings x = testing::GaussianGroup("M", 5, 3, 1, 1);
  const GroupEmbeddings y = testing::GaussianGroup("F", 5, 3, 1, 2);
  PermutationOptions options;
  options.permutations = 99;
  EXPECT_THROW(PermutationTest(x, y, DistanceMetric::Cosine(), options), Error);
  options.permutations = 100;
  EXPECT_THROW(PermutationTest(testing::GaussianGroup("M", 1, 3, 1, 1),
                               testing::GaussianGroup("F", 1, 3, 1, 2), DistanceMetric::Cosine(),
                               options),
               Error);
  EXPECT_THROW(PermutationTestFromDistances(MatrixXd::Zero(5, 5), options), Error);
}

TEST(EffectSize, Bands) {
  EXPECT_EQ(EffectSizeBand(0.1), "negligible");
  EXPECT_EQ(EffectSizeBand(-0.3), "small");
  EXPECT_EQ(EffectSizeBand(0.5), "medium");
  EXPECT_EQ(EffectSizeBand(0.8), "large");
}

}  // namespace
}  // namespace feedbias
