//==============================================================================
// Copyright 2026 The lidarfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//==============================================================================

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lidarfeat/error.hpp"
#include "lidarfeat/types.hpp"

namespace lidarfeat {

// ---------------------------------------------------------------------------
// Depth estimation

struct ThresholdAccuracy {
  double threshold = 0.0;
  double fraction = 0.0;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  std::vector<ThresholdAccuracy> accuracy;
};

inline const std::vector<double> kDefaultDepthThresholds = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

/// Standard monocular depth metrics; log is natural. A prediction counts as
/// accurate for threshold t when max(d / d_hat, d_hat / d) < t.
/// Throws EmptyInput, LengthMismatch, NonPositiveDepth.
DepthMetrics depth_metrics(const Eigen::Ref<const Eigen::VectorXd>& ground_truth,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted,
                           const std::vector<double>& thresholds = kDefaultDepthThresholds);

inline constexpr double kDefaultBerhuThreshold = 0.2;

/// Reverse Huber: |e| up to delta, (e^2 + delta^2) / (2 delta) beyond.
template <typename Scalar>
Scalar berhu(Scalar d, Scalar d_star, Scalar delta = Scalar(kDefaultBerhuThreshold)) {
  if (!(delta > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "berhu threshold must be positive");
  const Scalar e = d - d_star;
  const Scalar abs_e = e < Scalar(0) ? -e : e;
  if (abs_e <= delta) return abs_e;
  return (e * e + delta * delta) / (Scalar(2) * delta);
}

/// Mean Berhu over paired arrays.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar berhu_mean(const Eigen::DenseBase<DerivedA>& d, const Eigen::DenseBase<DerivedB>& d_star,
                                     typename DerivedA::Scalar delta = kDefaultBerhuThreshold) {
  using Scalar = typename DerivedA::Scalar;
  if (d.size() != d_star.size()) throw Error(ErrorCode::LengthMismatch, "berhu inputs differ in length");
  if (d.size() == 0) throw Error(ErrorCode::EmptyInput, "berhu of empty arrays");
  Scalar total(0);
  for (Index i = 0; i < d.size(); ++i) total += berhu<Scalar>(d.derived().coeff(i), d_star.derived().coeff(i), delta);
  return total / static_cast<Scalar>(d.size());
}

// ---------------------------------------------------------------------------
// Semantic segmentation

/// counts(g, p) = points of ground-truth class g predicted as p. Predictions
/// outside [0, C) are kept per ground-truth class in `unmatched` and count as
/// false negatives. Classes flagged in `excluded` get no IoU.
class ConfusionMatrix {
 public:
  using Counts = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ConfusionMatrix(int classes);
  ConfusionMatrix(Counts counts, std::vector<bool> excluded = {});

  int classes() const { return static_cast<int>(counts_.rows()); }
  const Counts& counts() const { return counts_; }
  const std::vector<std::uint64_t>& unmatched() const { return unmatched_; }
  const std::vector<bool>& excluded() const { return excluded_; }

  void exclude(int class_id);
  bool is_excluded(int class_id) const { return excluded_[static_cast<std::size_t>(class_id)]; }

  /// Ground truth outside [0, C) is skipped.
  void add(std::int64_t ground_truth, std::int64_t predicted);
  void add(std::span<const std::int64_t> ground_truth, std::span<const std::int64_t> predicted);

  /// Accumulates another matrix of the same size; exclusions are united.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::uint64_t true_positives(int c) const;
  std::uint64_t false_positives(int c) const;
  std::uint64_t false_negatives(int c) const;

 private:
  Counts counts_;
  std::vector<std::uint64_t> unmatched_;
  std::vector<bool> excluded_;
};

struct MiouResult {
  std::vector<std::optional<double>> per_class_iou;  // empty for excluded or absent classes
  std::vector<bool> absent;                          // zero denominator, not excluded
  double miou = 0.0;
  int classes_counted = 0;
};

/// IoU_c = TP / (TP + FP + FN); mIoU averages classes with a non-zero
/// denominator. Throws AllClassesAbsent when none remain.
MiouResult miou(const ConfusionMatrix& confusion);

// ---------------------------------------------------------------------------
// Teacher update

inline constexpr double kDefaultEmaKappa = 0.99;

/// kappa * teacher + (1 - kappa) * student, elementwise.
template <typename DerivedT, typename DerivedS>
typename DerivedT::PlainObject ema_update(const Eigen::MatrixBase<DerivedT>& teacher,
                                          const Eigen::MatrixBase<DerivedS>& student,
                                          double kappa = kDefaultEmaKappa) {
  if (teacher.rows() != student.rows() || teacher.cols() != student.cols()) {
    throw Error(ErrorCode::LengthMismatch, "teacher and student parameters differ in shape");
  }
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorCode::InvalidArgument, "kappa must lie in [0, 1]");
  using Scalar = typename DerivedT::Scalar;
  return Scalar(kappa) * teacher + Scalar(1.0 - kappa) * student;
}

// ---------------------------------------------------------------------------
// Contrastive objectives

template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "vectors differ in length");
  const double na = a.template cast<double>().norm();
  const double nb = b.template cast<double>().norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  return a.template cast<double>().dot(b.template cast<double>()) / (na * nb);
}

/// Embeddings with their labels and per-class probabilities (n x C).
struct EmbeddingSet {
  RowMatrix<double> vectors;
  std::vector<int> labels;
  RowMatrix<double> class_prob;
};

/// Rows with label c and p(c) strictly above delta_p.
std::vector<Index> anchor_candidates(const EmbeddingSet& set, int c, double delta_p);

/// Mean of the candidate rows. Throws NoCandidates.
Eigen::VectorXd positive_center(const EmbeddingSet& set, int c, double delta_p);

inline constexpr double kDefaultTemperature = 0.5;

/// -log(exp(s+/tau) / (exp(s+/tau) + sum_j exp(s-_j/tau))) with cosine s.
/// `negatives` holds one vector per row. Throws ZeroVector.
double infonce(const Eigen::Ref<const Eigen::VectorXd>& anchor, const Eigen::Ref<const Eigen::VectorXd>& positive,
               const Eigen::Ref<const RowMatrix<double>>& negatives, double tau = kDefaultTemperature);

enum class Similarity { Cosine, Dot };

struct ContrastiveParams {
  double alpha_p = 0.9;
  double alpha_n = 0.1;
  Similarity sim = Similarity::Cosine;
  int neighbors = 1;  // size of P(i) and N(i)
};

/// Mean over points of the positive and negative hinge terms, where P(i) and
/// N(i) are the nearest same-class and other-class points by coordinate
/// distance (ties to the lower index). A point whose class has no other
/// member contributes only its negative term.
/// Throws DegenerateClasses if fewer than two classes are present.
double class_contrastive(const Points3d& coords, const Eigen::Ref<const RowMatrix<double>>& embeddings,
                         std::span<const int> labels, const ContrastiveParams& params = {});

/// Mean of squared differences over all m * d entries. Throws DimensionMismatch.
double recon_mse(const Eigen::Ref<const RowMatrix<double>>& g, const Eigen::Ref<const RowMatrix<double>>& g_hat);

inline constexpr double kDefaultContrastiveWeight = 0.1;

/// recon + lambda * contrastive.
inline double embedding_objective(double recon, double contrastive, double lambda = kDefaultContrastiveWeight) {
  return recon + lambda * contrastive;
}

}  // namespace lidarfeat
