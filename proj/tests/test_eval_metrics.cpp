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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "lidarfeat/error.hpp"
#include "lidarfeat/eval_metrics.hpp"

using namespace lidarfeat;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

RowMatrix<double> rows(std::initializer_list<std::initializer_list<double>> r) {
  RowMatrix<double> out(static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
  Index i = 0;
  for (const auto& row : r) {
    Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lidarfeat::Error thrown";
  return ErrorCode::IoFailure;
}

}  // namespace

TEST(DepthMetrics, HandDerivedPair) {
  const DepthMetrics m = depth_metrics(vec({2, 4}), vec({1, 5}), {1.3});
  EXPECT_NEAR(m.abs_rel, 0.375, 1e-12);
  EXPECT_NEAR(m.sq_rel, 0.375, 1e-12);
  EXPECT_NEAR(m.rmse, 1.0, 1e-12);
  EXPECT_NEAR(m.rmse_log, std::sqrt((std::log(2.0) * std::log(2.0) + std::log(1.25) * std::log(1.25)) / 2.0), 1e-12);
  EXPECT_NEAR(m.rmse_log, 0.51490, 1e-5);
  ASSERT_EQ(m.accuracy.size(), 1u);
  EXPECT_EQ(m.accuracy[0].fraction, 0.5);
}

TEST(DepthMetrics, IdentityAndLimits) {
  const DepthMetrics m = depth_metrics(vec({1.5, 7, 30}), vec({1.5, 7, 30}));
  EXPECT_EQ(m.abs_rel, 0.0);
  EXPECT_EQ(m.rmse_log, 0.0);
  for (const auto& a : m.accuracy) EXPECT_EQ(a.fraction, 1.0);
  const DepthMetrics wide = depth_metrics(vec({1, 100}), vec({50, 0.5}), {1e12});
  EXPECT_EQ(wide.accuracy[0].fraction, 1.0);
}

TEST(DepthMetrics, StrictThreshold) {
  // Ratio exactly 1.25 is not below 1.25.
  const DepthMetrics m = depth_metrics(vec({4}), vec({5}), {1.25});
  EXPECT_EQ(m.accuracy[0].fraction, 0.0);
}

TEST(DepthMetrics, RmseSquaredIsMeanSquaredError) {
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(0.5, 80.0);
  Eigen::VectorXd gt(500), pred(500);
  for (Index i = 0; i < 500; ++i) {
    gt[i] = u(rng);
    pred[i] = u(rng);
  }
  const DepthMetrics m = depth_metrics(gt, pred);
  EXPECT_NEAR(m.rmse * m.rmse, (gt - pred).squaredNorm() / 500.0, 1e-9);
  EXPECT_GE(m.abs_rel, 0.0);
  EXPECT_GE(m.sq_rel, 0.0);
}

TEST(DepthMetrics, Errors) {
  EXPECT_EQ(code_of([] { depth_metrics(Eigen::VectorXd(0), Eigen::VectorXd(0)); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { depth_metrics(vec({1, 2}), vec({1})); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { depth_metrics(vec({1, 0}), vec({1, 1})); }), ErrorCode::NonPositiveDepth);
  EXPECT_EQ(code_of([] { depth_metrics(vec({1, 2}), vec({1, -1})); }), ErrorCode::NonPositiveDepth);
}

TEST(Berhu, Branches) {
  EXPECT_NEAR(berhu(1.1, 1.0, 0.2), 0.1, 1e-15);
  EXPECT_NEAR(berhu(1.0, 1.4, 0.2), 0.5, 1e-15);
  EXPECT_EQ(berhu(3.0, 3.0), 0.0);
  EXPECT_THROW(berhu(1.0, 2.0, 0.0), Error);
}

TEST(Berhu, ContinuousAtThreshold) {
  for (double delta : {0.2, 0.5, 1.0, 3.0}) {
    const double below = berhu(delta, 0.0, delta);
    const double above = berhu(std::nextafter(delta, 10.0), 0.0, delta);
    EXPECT_EQ(below, delta);
    EXPECT_NEAR(above, delta, 1e-15);
  }
}

TEST(Berhu, MeanAndFloat) {
  EXPECT_NEAR(berhu_mean(vec({1.1, 1.0}), vec({1.0, 1.4}), 0.2), 0.3, 1e-15);
  EXPECT_NEAR(berhu(1.1f, 1.0f, 0.2f), 0.1f, 1e-6f);
  EXPECT_THROW(berhu_mean(vec({1}), vec({1, 2})), Error);
}

TEST(Miou, HandCountedExample) {
  ConfusionMatrix cm(2);
  const std::vector<std::int64_t> gt{0, 0, 1, 1};
  const std::vector<std::int64_t> pred{0, 1, 1, 1};
  cm.add(gt, pred);
  const MiouResult r = miou(cm);
  EXPECT_DOUBLE_EQ(*r.per_class_iou[0], 0.5);
  EXPECT_DOUBLE_EQ(*r.per_class_iou[1], 2.0 / 3.0);
  EXPECT_NEAR(r.miou, 7.0 / 12.0, 1e-15);
  EXPECT_EQ(r.classes_counted, 2);
}

TEST(Miou, PerfectDiagonal) {
  ConfusionMatrix::Counts c = ConfusionMatrix::Counts::Zero(4, 4);
  c.diagonal() << 3, 9, 1, 7;
  EXPECT_EQ(miou(ConfusionMatrix(c)).miou, 1.0);
}

TEST(Miou, MatchesSetOracle) {
  std::mt19937_64 rng(139);
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 5;
    std::uniform_int_distribution<int> cls(0, classes - 1);
    const int n = 1 + static_cast<int>(rng() % 300);
    std::vector<std::int64_t> gt(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      gt[static_cast<std::size_t>(i)] = cls(rng);
      pred[static_cast<std::size_t>(i)] = cls(rng);
    }
    ConfusionMatrix cm(classes);
    cm.add(gt, pred);
    const MiouResult r = miou(cm);

    double sum = 0.0;
    int counted = 0;
    for (int c = 0; c < classes; ++c) {
      std::set<int> g, p;
      for (int i = 0; i < n; ++i) {
        if (gt[static_cast<std::size_t>(i)] == c) g.insert(i);
        if (pred[static_cast<std::size_t>(i)] == c) p.insert(i);
      }
      std::set<int> inter, uni = g;
      for (int i : p) {
        if (g.count(i)) inter.insert(i);
        uni.insert(i);
      }
      if (uni.empty()) {
        EXPECT_TRUE(r.absent[static_cast<std::size_t>(c)]);
        continue;
      }
      const double iou = static_cast<double>(inter.size()) / static_cast<double>(uni.size());
      EXPECT_EQ(*r.per_class_iou[static_cast<std::size_t>(c)], iou);
      sum += iou;
      ++counted;
    }
    EXPECT_EQ(r.classes_counted, counted);
    EXPECT_EQ(r.miou, sum / counted);
  }
}

TEST(Miou, ClassRelabellingInvariant) {
  std::mt19937_64 rng(149);
  ConfusionMatrix a(4), b(4);
  const std::array<int, 4> perm{2, 0, 3, 1};
  for (int i = 0; i < 400; ++i) {
    const auto g = static_cast<std::int64_t>(rng() % 4), p = static_cast<std::int64_t>(rng() % 4);
    a.add(g, p);
    b.add(perm[static_cast<std::size_t>(g)], perm[static_cast<std::size_t>(p)]);
  }
  EXPECT_NEAR(miou(a).miou, miou(b).miou, 1e-15);
}

TEST(Miou, ExclusionAbsenceAndUnmatched) {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(0, 7);   // out-of-range prediction: false negative for class 0
  cm.add(255, 1); // ignored ground truth
  cm.exclude(2);
  cm.add(2, 2);
  const MiouResult r = miou(cm);
  EXPECT_DOUBLE_EQ(*r.per_class_iou[0], 0.5);
  EXPECT_TRUE(r.absent[1]);
  EXPECT_FALSE(r.per_class_iou[2].has_value());
  EXPECT_FALSE(r.absent[2]);
  EXPECT_EQ(r.classes_counted, 1);

  ConfusionMatrix empty(3);
  EXPECT_EQ(code_of([&] { miou(empty); }), ErrorCode::AllClassesAbsent);
}

TEST(Miou, AccumulationMatchesSingleMatrix) {
  ConfusionMatrix a(3), b(3), both(3);
  a.add(0, 1);
  a.add(1, 9);
  b.add(2, 2);
  b.add(1, 1);
  for (auto [g, p] : std::vector<std::pair<int, int>>{{0, 1}, {1, 9}, {2, 2}, {1, 1}}) both.add(g, p);
  a += b;
  EXPECT_TRUE(a.counts() == both.counts());
  EXPECT_EQ(a.unmatched(), both.unmatched());
}

TEST(Ema, Cases) {
  const Eigen::Vector3d t(1.0, -2.0, 0.5), s(0.0, 4.0, 0.5);
  EXPECT_TRUE(ema_update(t, t, 0.3) == t);
  EXPECT_TRUE(ema_update(t, s, 0.0) == s);
  EXPECT_DOUBLE_EQ(ema_update(t, s)[0], 0.99);
  const Eigen::Vector3d m = ema_update(t, s, 0.7);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_GE(m[i], std::min(t[i], s[i]));
    EXPECT_LE(m[i], std::max(t[i], s[i]));
  }
  EXPECT_THROW(ema_update(Eigen::VectorXd(t), Eigen::VectorXd::Ones(2)), Error);
  EXPECT_THROW(ema_update(t, s, 1.5), Error);
}

TEST(Anchors, StrictThresholdAndCenter) {
  EmbeddingSet set;
  set.vectors = rows({{1, 0}, {0, 1}, {5, 5}});
  set.labels = {3, 3, 1};
  set.class_prob = RowMatrix<double>::Zero(3, 4);
  set.class_prob(0, 3) = 0.9;
  set.class_prob(1, 3) = 0.7;
  set.class_prob(2, 1) = 0.99;
  EXPECT_EQ(anchor_candidates(set, 3, 0.8), (std::vector<Index>{0}));
  EXPECT_EQ(anchor_candidates(set, 3, 0.9), (std::vector<Index>{}));
  EXPECT_TRUE(positive_center(set, 3, 0.5).isApprox(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(anchor_candidates(set, 1, 1.0).empty());
  EXPECT_EQ(code_of([&] { positive_center(set, 3, 1.0); }), ErrorCode::NoCandidates);
}

TEST(InfoNce, ClosedForm) {
  const RowMatrix<double> neg = rows({{-1, 0}});
  EXPECT_NEAR(infonce(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), neg, 0.5), std::log1p(std::exp(-4.0)), 1e-15);
  EXPECT_NEAR(infonce(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), neg, 0.5), 0.01815, 1e-5);
  EXPECT_EQ(infonce(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), RowMatrix<double>(0, 2)), 0.0);
}

TEST(InfoNce, MonotoneInNegativeSimilarity) {
  double prev = -1.0;
  for (double angle = 3.1; angle >= 0.0; angle -= 0.1) {
    RowMatrix<double> neg(2, 2);
    neg << std::cos(angle), std::sin(angle), 0, -1;
    const double loss = infonce(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.8, 0.6), neg);
    EXPECT_GT(loss, prev);
    EXPECT_GE(loss, 0.0);
    prev = loss;
  }
}

TEST(InfoNce, StableForSmallTemperature) {
  const RowMatrix<double> neg = rows({{1, 0}, {1, 0}});
  const double loss = infonce(Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0), neg, 1e-3);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_NEAR(loss, 2000.0 + std::log(2.0), 1e-9);
  EXPECT_EQ(code_of([&] { infonce(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), neg); }), ErrorCode::ZeroVector);
}

TEST(ClassContrastive, SeparatedEmbeddingsGiveZero) {
  Points3d coords(4, 3);
  coords << 0, 0, 0, 1, 0, 0, 10, 0, 0, 11, 0, 0;
  const RowMatrix<double> e = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  const std::vector<int> labels{0, 0, 1, 1};
  EXPECT_EQ(class_contrastive(coords, e, labels), 0.0);
}

TEST(ClassContrastive, HandComputedHinge) {
  Points3d coords(4, 3);
  coords << 0, 0, 0, 1, 0, 0, 10, 0, 0, 11, 0, 0;
  const RowMatrix<double> e = rows({{1, 0}, {1, 0}, {1, 1}, {1, 1}});
  const std::vector<int> labels{0, 0, 1, 1};
  // Every point's nearest other-class point has cosine 1/sqrt(2).
  EXPECT_NEAR(class_contrastive(coords, e, labels), std::sqrt(0.5) - 0.1, 1e-15);
  ContrastiveParams dot;
  dot.sim = Similarity::Dot;
  dot.alpha_p = 3.0;
  // Positives: dots 1, 1, 2, 2 -> hinges 2, 2, 1, 1. Negatives: dots 1 -> 0.9 each.
  EXPECT_NEAR(class_contrastive(coords, e, labels, dot), (6.0 + 3.6) / 4.0, 1e-15);
}

TEST(ClassContrastive, Errors) {
  Points3d coords = Points3d::Zero(2, 3);
  const RowMatrix<double> e = rows({{1, 0}, {0, 1}});
  const std::vector<int> same{4, 4};
  EXPECT_EQ(code_of([&] { class_contrastive(coords, e, same); }), ErrorCode::DegenerateClasses);
  const std::vector<int> three{1, 2, 3};
  EXPECT_EQ(code_of([&] { class_contrastive(coords, e, three); }), ErrorCode::LengthMismatch);
}

TEST(Reconstruction, MseAndObjective) {
  EXPECT_EQ(recon_mse(rows({{1, 2}}), rows({{0, 0}})), 2.5);
  EXPECT_EQ(recon_mse(rows({{1, 2}, {3, 4}}), rows({{1, 2}, {3, 4}})), 0.0);
  EXPECT_GT(recon_mse(rows({{1, 2}}), rows({{1, std::nextafter(2.0, 3.0)}})), 0.0);
  EXPECT_THROW(recon_mse(rows({{1, 2}}), rows({{1}})), Error);
  EXPECT_DOUBLE_EQ(embedding_objective(2.5, 1.0), 2.6);
}
