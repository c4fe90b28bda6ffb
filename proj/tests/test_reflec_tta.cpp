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

#include <random>

#include "lidarfeat/error.hpp"
#include "lidarfeat/reflec_tta.hpp"
#include "test_support.hpp"

using namespace lidarfeat;
namespace lt = lidarfeat::testing;

TEST(ReflecTta, HandCountedHistogram) {
  Points3d p(4, 3);
  p << 1, 1, 0, 1.1, 1, 0, 1, 1.1, 0, 1.2, 1.2, 0;
  Eigen::VectorXd r(4);
  r << 0.05, 0.15, 0.15, 0.95;
  const Eigen::MatrixXd f = tta_features_normalized(p, r, {{1, 1}}, 10);
  Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(10);
  expected[0] = 0.5;
  expected[1] = 1.0;
  expected[9] = 0.5;
  for (Index i = 0; i < 4; ++i) EXPECT_TRUE(f.row(i) == expected) << f.row(i);
}

TEST(ReflecTta, TopEdgeIsClosed) {
  Points3d p(2, 3);
  p << 1, 0, 0, 2, 0, 0;
  Eigen::VectorXd r(2);
  r << 1.0, 0.0;
  const Eigen::MatrixXd f = tta_features_normalized(p, r, {{1, 1}}, 4);
  EXPECT_EQ(f(0, 3), 1.0);
  EXPECT_EQ(f(0, 0), 1.0);
}

TEST(ReflecTta, ConstantReflectivityGivesOneHot) {
  std::mt19937_64 rng(107);
  const RapidCloud c = lt::random_scan(rng, 200);
  const Eigen::MatrixXd f = reflec_tta_features(c.xyz, Eigen::VectorXd::Constant(200, 42.0));
  for (Index i = 0; i < f.rows(); ++i) {
    for (int g = 0; g < 3; ++g) {
      const auto slice = f.row(i).segment(g * 10, 10);
      EXPECT_EQ(slice.sum(), 1.0);
      EXPECT_EQ(slice[0], 1.0);
    }
  }
}

TEST(ReflecTta, DefaultWidthAndBounds) {
  std::mt19937_64 rng(109);
  const RapidCloud c = lt::random_scan(rng, 1000);
  const Eigen::MatrixXd f = reflec_tta_features(c.xyz, c.reflectivity);
  ASSERT_EQ(f.cols(), 30);
  EXPECT_GE(f.minCoeff(), 0.0);
  EXPECT_LE(f.maxCoeff(), 1.0);
  for (Index i = 0; i < f.rows(); ++i)
    for (int g = 0; g < 3; ++g) EXPECT_EQ(f.row(i).segment(g * 10, 10).maxCoeff(), 1.0);
}

TEST(ReflecTta, SameBinsSameFeatures) {
  std::mt19937_64 rng(113);
  const RapidCloud c = lt::random_scan(rng, 2000);
  const Eigen::MatrixXd f = reflec_tta_features(c.xyz, c.reflectivity);
  std::vector<std::vector<int>> bins;
  for (const BinResolution& g : kDefaultTtaGrids) bins.push_back(assign_bins(c.xyz, g));
  for (Index i = 0; i < 200; ++i) {
    for (Index j = i + 1; j < 2000; ++j) {
      bool same = true;
      for (const auto& b : bins) same = same && b[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(j)];
      if (same) EXPECT_TRUE(f.row(i) == f.row(j));
    }
  }
}

TEST(ReflecTta, AffineReflectivityInvariant) {
  std::mt19937_64 rng(127);
  const RapidCloud c = lt::random_scan(rng, 800);
  const Eigen::MatrixXd a = reflec_tta_features(c.xyz, c.reflectivity);
  const Eigen::MatrixXd b = reflec_tta_features(c.xyz, (4.0 * c.reflectivity.array() + 16.0).matrix());
  EXPECT_TRUE(a == b);
}

TEST(ReflecTta, EmptyAndInvalid) {
  EXPECT_EQ(reflec_tta_features(Points3d(0, 3), Eigen::VectorXd(0)).rows(), 0);
  Points3d p = Points3d::Ones(2, 3);
  Eigen::VectorXd neg(2);
  neg << 1.0, -1.0;
  EXPECT_THROW(reflec_tta_features(p, neg), Error);
  Eigen::VectorXd nan(2);
  nan << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(reflec_tta_features(p, nan), Error);
  EXPECT_THROW(reflec_tta_features(p, Eigen::VectorXd::Ones(3)), Error);
}

TEST(AssignBins, RadialAndAzimuthIndex) {
  Points3d p(3, 3);
  p << 10, 0, 0, -1, -0.001, 5, 0, 5, 0;
  const std::vector<int> b = assign_bins(p, {2, 4});
  EXPECT_EQ(b[0], 1 * 4 + 2);
  EXPECT_EQ(b[1], 0 * 4 + 0);
  EXPECT_EQ(b[2], 1 * 4 + 3);
}

TEST(NormalizeUnit, MinMax) {
  Eigen::VectorXd v(3);
  v << 2, 4, 6;
  EXPECT_TRUE(normalize_unit(v).isApprox(Eigen::Vector3d(0, 0.5, 1)));
  EXPECT_TRUE(normalize_unit(Eigen::VectorXd::Constant(3, 7.0)).isZero());
}
