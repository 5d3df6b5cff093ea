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

#ifndef FEEDBIAS_DISTANCE_H_
#define FEEDBIAS_DISTANCE_H_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "feedbias/common.h"
#include "feedbias/embedder.h"
#include "feedbias/types.h"

namespace feedbias {

enum class MetricKind { kCosine, kEuclidean, kMahalanobis };

std::string_view MetricName(MetricKind kind);
MetricKind ParseMetric(std::string_view name);

// Mahalanobis regularization: Sigma + lambda * I. A negative lambda selects the
// default 0.1 * trace(Sigma) / dim.
struct DistanceMetric {
  MetricKind kind = MetricKind::kCosine;
  double lambda = -1.0;

  static DistanceMetric Cosine() { return {MetricKind::kCosine, 0.0}; }
  static DistanceMetric Euclidean() { return {MetricKind::kEuclidean, 0.0}; }
  static DistanceMetric Mahalanobis(double lambda = -1.0) {
    return {MetricKind::kMahalanobis, lambda};
  }
};

// 1 - cos(angle). Throws on dim mismatch or a zero-norm operand.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar CosineDistance(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Require(a.size() == b.size(), "cosine distance: dim mismatch");
  const Scalar norm_a = a.norm();
  const Scalar norm_b = b.norm();
  Require(norm_a > Scalar(0) && norm_b > Scalar(0), "cosine distance: zero-norm vector");
  const Scalar cosine = a.dot(b) / (norm_a * norm_b);
  return Scalar(1) - cosine;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar EuclideanDistance(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  Require(a.size() == b.size(), "euclidean distance: dim mismatch");
  return (a - b).norm();
}

// Covariance model for Mahalanobis distances over a pooled sample.
template <typename Scalar>
class MahalanobisModel {
 public:
  // Sample covariance (n - 1) of the rows of `pooled`, regularized with
  // lambda * I. lambda < 0 selects 0.1 * trace(Sigma) / dim. Throws on a
  // singular covariance (including lambda == 0 with n <= dim).
  template <typename Derived>
  MahalanobisModel(const Eigen::MatrixBase<Derived>& pooled, Scalar lambda) {
    const Eigen::Index n = pooled.rows();
    const Eigen::Index dim = pooled.cols();
    Require(n >= 2, "mahalanobis: pooled set needs at least 2 vectors");
    mean_ = pooled.colwise().mean().transpose();
    const MatrixX<Scalar> centered = pooled.rowwise() - mean_.transpose();
    MatrixX<Scalar> covariance = (centered.transpose() * centered) / Scalar(n - 1);
    if (lambda < Scalar(0)) lambda = Scalar(0.1) * covariance.trace() / Scalar(dim);
    Require(lambda > Scalar(0) || n > dim,
            "mahalanobis: lambda must be > 0 when the pooled size does not exceed dim");
    lambda_ = lambda;
    covariance.diagonal().array() += lambda;
    llt_.compute(covariance);
    const Scalar max_diag = llt_.matrixLLT().diagonal().cwiseAbs().maxCoeff();
    const Scalar min_diag = llt_.matrixLLT().diagonal().cwiseAbs().minCoeff();
    if (llt_.info() != Eigen::Success || !(min_diag > max_diag * Scalar(1e-10))) {
      Fail(ErrorKind::kNumeric, "mahalanobis: covariance is singular; use lambda > 0");
    }
  }

  // Identity covariance: distances reduce to Euclidean ones.
  static MahalanobisModel Identity(const VectorX<Scalar>& mean) {
    MahalanobisModel model;
    model.mean_ = mean;
    model.identity_ = true;
    return model;
  }

  const VectorX<Scalar>& mean() const { return mean_; }
  Scalar lambda() const { return lambda_; }

  // Whitened coordinates: L^{-1} x where Sigma + lambda I = L L^T.
  template <typename Derived>
  VectorX<Scalar> Whiten(const Eigen::MatrixBase<Derived>& x) const {
    if (identity_) return x;
    return llt_.matrixL().solve(VectorX<Scalar>(x));
  }

  template <typename DerivedA, typename DerivedB>
  Scalar Distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) const {
    Require(a.size() == b.size() && a.size() == mean_.size(), "mahalanobis: dim mismatch");
    return Whiten(VectorX<Scalar>(a - b)).norm();
  }

  template <typename Derived>
  Scalar DistanceToMean(const Eigen::MatrixBase<Derived>& v) const {
    return Distance(v, mean_);
  }

 private:
  MahalanobisModel() = default;

  VectorX<Scalar> mean_;
  Scalar lambda_ = Scalar(0);
  bool identity_ = false;
  Eigen::LLT<MatrixX<Scalar>> llt_;
};

// Distance of `v` to the mean of `pooled` under (Sigma + lambda I).
double MahalanobisDistance(const EmbeddingVector& v, const std::vector<EmbeddingVector>& pooled,
                           double lambda);

double Distance(const EmbeddingVector& a, const EmbeddingVector& b, MetricKind kind);

// Mean of index-paired distances. For Mahalanobis the covariance is estimated
// from the pooled 2n vectors.
double PairedMeanDistance(const GroupEmbeddings& x, const GroupEmbeddings& y,
                          const DistanceMetric& metric);

// Per-pair distances D[i] = d(x_i, y_i) (same conventions as above).
VectorXd PairDistances(const GroupEmbeddings& x, const GroupEmbeddings& y,
                       const DistanceMetric& metric);

}  // namespace feedbias

#endif  // FEEDBIAS_DISTANCE_H_
