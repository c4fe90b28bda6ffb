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

#include "lidarfeat/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lidarfeat/geometry.hpp"

namespace lidarfeat {

DepthMetrics depth_metrics(const Eigen::Ref<const Eigen::VectorXd>& ground_truth,
                           const Eigen::Ref<const Eigen::VectorXd>& predicted, const std::vector<double>& thresholds) {
  const Index n = ground_truth.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no depth pairs");
  if (predicted.size() != n) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(n) + " ground-truth depths vs " + std::to_string(predicted.size()) + " predictions");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(ground_truth[i] > 0.0) || !(predicted[i] > 0.0) || !std::isfinite(ground_truth[i]) ||
        !std::isfinite(predicted[i])) {
      throw Error(ErrorCode::NonPositiveDepth, "depth pair " + std::to_string(i) + " is not a positive finite value");
    }
  }
  for (double t : thresholds) {
    if (!(t > 1.0)) throw Error(ErrorCode::InvalidArgument, "accuracy thresholds must exceed 1");
  }

  const Eigen::ArrayXd d = ground_truth.array();
  const Eigen::ArrayXd p = predicted.array();
  const Eigen::ArrayXd diff = d - p;
  const Eigen::ArrayXd log_diff = d.log() - p.log();
  const Eigen::ArrayXd ratio = (d / p).max(p / d);

  DepthMetrics m;
  m.abs_rel = (diff.abs() / d).mean();
  m.sq_rel = (diff.square() / d).mean();
  m.rmse = std::sqrt(diff.square().mean());
  m.rmse_log = std::sqrt(log_diff.square().mean());
  for (double t : thresholds) {
    m.accuracy.push_back({t, static_cast<double>((ratio < t).count()) / static_cast<double>(n)});
  }
  return m;
}

ConfusionMatrix::ConfusionMatrix(int classes) {
  if (classes <= 0) throw Error(ErrorCode::InvalidArgument, "class count must be positive");
  counts_ = Counts::Zero(classes, classes);
  unmatched_.assign(static_cast<std::size_t>(classes), 0);
  excluded_.assign(static_cast<std::size_t>(classes), false);
}

ConfusionMatrix::ConfusionMatrix(Counts counts, std::vector<bool> excluded) : counts_(std::move(counts)) {
  if (counts_.rows() == 0 || counts_.rows() != counts_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "confusion matrix must be square and non-empty");
  }
  const auto c = static_cast<std::size_t>(counts_.rows());
  if (excluded.empty()) excluded.assign(c, false);
  if (excluded.size() != c) throw Error(ErrorCode::LengthMismatch, "exclusion mask size differs from class count");
  excluded_ = std::move(excluded);
  unmatched_.assign(c, 0);
}

void ConfusionMatrix::exclude(int class_id) {
  if (class_id < 0 || class_id >= classes()) throw Error(ErrorCode::InvalidArgument, "class id out of range");
  excluded_[static_cast<std::size_t>(class_id)] = true;
}

void ConfusionMatrix::add(std::int64_t ground_truth, std::int64_t predicted) {
  if (ground_truth < 0 || ground_truth >= classes()) return;
  if (predicted < 0 || predicted >= classes()) {
    ++unmatched_[static_cast<std::size_t>(ground_truth)];
    return;
  }
  ++counts_(ground_truth, predicted);
}

void ConfusionMatrix::add(std::span<const std::int64_t> ground_truth, std::span<const std::int64_t> predicted) {
  if (ground_truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(ground_truth.size()) + " labels vs " +
                                               std::to_string(predicted.size()) + " predictions");
  }
  for (std::size_t i = 0; i < ground_truth.size(); ++i) add(ground_truth[i], predicted[i]);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes() != classes()) throw Error(ErrorCode::DimensionMismatch, "confusion matrices differ in size");
  counts_ += other.counts_;
  for (std::size_t c = 0; c < unmatched_.size(); ++c) {
    unmatched_[c] += other.unmatched_[c];
    excluded_[c] = excluded_[c] || other.excluded_[c];
  }
  return *this;
}

std::uint64_t ConfusionMatrix::true_positives(int c) const { return counts_(c, c); }

std::uint64_t ConfusionMatrix::false_positives(int c) const { return counts_.col(c).sum() - counts_(c, c); }

std::uint64_t ConfusionMatrix::false_negatives(int c) const {
  return counts_.row(c).sum() - counts_(c, c) + unmatched_[static_cast<std::size_t>(c)];
}

MiouResult miou(const ConfusionMatrix& confusion) {
  MiouResult result;
  const int classes = confusion.classes();
  result.per_class_iou.assign(static_cast<std::size_t>(classes), std::nullopt);
  result.absent.assign(static_cast<std::size_t>(classes), false);
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    if (confusion.is_excluded(c)) continue;
    const std::uint64_t tp = confusion.true_positives(c);
    const std::uint64_t denom = tp + confusion.false_positives(c) + confusion.false_negatives(c);
    if (denom == 0) {
      result.absent[static_cast<std::size_t>(c)] = true;
      continue;
    }
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    result.per_class_iou[static_cast<std::size_t>(c)] = iou;
    sum += iou;
    ++result.classes_counted;
  }
  if (result.classes_counted == 0) throw Error(ErrorCode::AllClassesAbsent, "no class has a non-zero IoU denominator");
  result.miou = sum / result.classes_counted;
  return result;
}

namespace {

void check_set(const EmbeddingSet& set, int c) {
  const auto n = static_cast<std::size_t>(set.vectors.rows());
  if (set.labels.size() != n || static_cast<std::size_t>(set.class_prob.rows()) != n) {
    throw Error(ErrorCode::LengthMismatch, "embedding set rows, labels and probabilities differ in count");
  }
  if (c < 0 || c >= set.class_prob.cols()) throw Error(ErrorCode::InvalidArgument, "class id out of range");
}

}  // namespace

std::vector<Index> anchor_candidates(const EmbeddingSet& set, int c, double delta_p) {
  check_set(set, c);
  if (!(delta_p >= 0.0 && delta_p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "delta_p must lie in [0, 1]");
  std::vector<Index> out;
  for (Index i = 0; i < set.vectors.rows(); ++i) {
    if (set.labels[static_cast<std::size_t>(i)] == c && set.class_prob(i, c) > delta_p) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd positive_center(const EmbeddingSet& set, int c, double delta_p) {
  const std::vector<Index> rows = anchor_candidates(set, c, delta_p);
  if (rows.empty()) throw Error(ErrorCode::NoCandidates, "class " + std::to_string(c) + " has no anchor candidates");
  Eigen::VectorXd center = Eigen::VectorXd::Zero(set.vectors.cols());
  for (Index r : rows) center += set.vectors.row(r).transpose();
  return center / static_cast<double>(rows.size());
}

double infonce(const Eigen::Ref<const Eigen::VectorXd>& anchor, const Eigen::Ref<const Eigen::VectorXd>& positive,
               const Eigen::Ref<const RowMatrix<double>>& negatives, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  if (negatives.rows() > 0 && negatives.cols() != anchor.size()) {
    throw Error(ErrorCode::DimensionMismatch, "negatives differ in dimension from the anchor");
  }
  const double z_pos = cosine_similarity(anchor, positive) / tau;
  std::vector<double> z_neg(static_cast<std::size_t>(negatives.rows()));
  for (Index j = 0; j < negatives.rows(); ++j) {
    z_neg[static_cast<std::size_t>(j)] = cosine_similarity(anchor, negatives.row(j).transpose()) / tau;
  }
  // log(1 + sum exp(z_j - z+)) keeps precision for small losses.
  double tail = 0.0;
  for (double z : z_neg) tail += std::exp(z - z_pos);
  if (std::isfinite(tail)) return std::log1p(tail);
  const double top = std::max(z_pos, *std::max_element(z_neg.begin(), z_neg.end()));
  double sum = std::exp(z_pos - top);
  for (double z : z_neg) sum += std::exp(z - top);
  return top + std::log(sum) - z_pos;
}

double class_contrastive(const Points3d& coords, const Eigen::Ref<const RowMatrix<double>>& embeddings,
                         std::span<const int> labels, const ContrastiveParams& params) {
  const Index n = coords.rows();
  if (embeddings.rows() != n || static_cast<Index>(labels.size()) != n) {
    throw Error(ErrorCode::LengthMismatch, "coordinates, embeddings and labels differ in count");
  }
  if (params.neighbors < 1) throw Error(ErrorCode::InvalidArgument, "neighbour count must be at least 1");

  std::map<int, std::vector<Index>> members;
  for (Index i = 0; i < n; ++i) members[labels[static_cast<std::size_t>(i)]].push_back(i);
  if (members.size() < 2) throw Error(ErrorCode::DegenerateClasses, "contrastive loss needs at least two classes");

  std::map<int, NeighborIndex> indices;
  for (const auto& [label, rows] : members) indices.emplace(label, NeighborIndex(coords, rows));

  auto sim = [&](Index a, Index b) {
    if (params.sim == Similarity::Cosine) return cosine_similarity(embeddings.row(a), embeddings.row(b));
    return embeddings.row(a).dot(embeddings.row(b));
  };

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    const NeighborIndex& own = indices.at(label);
    const int k_pos = static_cast<int>(std::min<Index>(params.neighbors, own.size() - 1));
    if (k_pos > 0) {
      const NeighborList pos = own.query(i, k_pos);
      double term = 0.0;
      for (Index p : pos.neighbor_indices) term += std::max(params.alpha_p - sim(i, p), 0.0);
      total += term / static_cast<double>(k_pos);
    }

    std::vector<std::pair<double, Index>> candidates;
    const Eigen::Vector3d location = coords.row(i).transpose();
    for (const auto& [other, index] : indices) {
      if (other == label) continue;
      const int k = static_cast<int>(std::min<Index>(params.neighbors, index.size()));
      const NeighborList found = index.query_point(location, k);
      for (std::size_t j = 0; j < found.neighbor_indices.size(); ++j) {
        candidates.emplace_back(found.squared_distances[j], found.neighbor_indices[j]);
      }
    }
    const auto k_neg = std::min<std::size_t>(static_cast<std::size_t>(params.neighbors), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k_neg), candidates.end());
    double term = 0.0;
    for (std::size_t j = 0; j < k_neg; ++j) term += std::max(sim(i, candidates[j].second) - params.alpha_n, 0.0);
    total += term / static_cast<double>(k_neg);
  }
  return total / static_cast<double>(n);
}

double recon_mse(const Eigen::Ref<const RowMatrix<double>>& g, const Eigen::Ref<const RowMatrix<double>>& g_hat) {
  if (g.rows() != g_hat.rows() || g.cols() != g_hat.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reconstruction differs in shape from its target");
  }
  if (g.size() == 0) throw Error(ErrorCode::EmptyInput, "reconstruction of an empty matrix");
  return (g - g_hat).squaredNorm() / static_cast<double>(g.size());
}

}  // namespace lidarfeat
