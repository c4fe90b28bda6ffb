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

#include "lidarfeat/reflec_tta.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lidarfeat/error.hpp"

namespace lidarfeat {

std::vector<int> assign_bins(const Eigen::Ref<const Points3d>& xyz, const BinResolution& grid) {
  if (grid.radial_bins <= 0 || grid.azimuth_bins <= 0) {
    throw Error(ErrorCode::InvalidArgument, "bin counts must be positive");
  }
  const Index n = xyz.rows();
  std::vector<int> bins(static_cast<std::size_t>(n));
  if (n == 0) return bins;
  const Eigen::VectorXd planar = xyz.leftCols<2>().rowwise().norm();
  const double max_radius = planar.maxCoeff();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (Index i = 0; i < n; ++i) {
    int radial = 0;
    if (max_radius > 0.0) {
      radial = std::min(static_cast<int>(std::floor(planar[i] / max_radius * grid.radial_bins)), grid.radial_bins - 1);
    }
    const double azimuth = std::atan2(xyz(i, 1), xyz(i, 0)) + std::numbers::pi;  // [0, 2pi]
    const int sector =
        std::clamp(static_cast<int>(std::floor(azimuth / kTwoPi * grid.azimuth_bins)), 0, grid.azimuth_bins - 1);
    bins[static_cast<std::size_t>(i)] = radial * grid.azimuth_bins + sector;
  }
  return bins;
}

Eigen::VectorXd normalize_unit(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) return {};
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Zero(values.size());
  return ((values.array() - lo) / (hi - lo)).matrix();
}

Eigen::MatrixXd tta_features_normalized(const Eigen::Ref<const Points3d>& xyz,
                                        const Eigen::Ref<const Eigen::VectorXd>& unit_reflectivity,
                                        const std::vector<BinResolution>& grids, int histogram_bins) {
  const Index n = xyz.rows();
  if (unit_reflectivity.size() != n) throw Error(ErrorCode::LengthMismatch, "one reflectivity per point required");
  if (histogram_bins <= 0) throw Error(ErrorCode::InvalidArgument, "histogram bin count must be positive");
  if (!unit_reflectivity.allFinite()) throw Error(ErrorCode::NonFiniteValue, "reflectivity contains NaN/Inf");

  const Index width = static_cast<Index>(grids.size()) * histogram_bins;
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(n, width);
  if (n == 0) return features;

  std::vector<int> bucket(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double r = std::clamp(unit_reflectivity[i], 0.0, 1.0);
    bucket[static_cast<std::size_t>(i)] =
        std::min(static_cast<int>(std::floor(r * histogram_bins)), histogram_bins - 1);
  }

  for (std::size_t g = 0; g < grids.size(); ++g) {
    const std::vector<int> bins = assign_bins(xyz, grids[g]);
    const Index cells = static_cast<Index>(grids[g].radial_bins) * grids[g].azimuth_bins;
    Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(cells, histogram_bins);
    for (Index i = 0; i < n; ++i) {
      hist(bins[static_cast<std::size_t>(i)], bucket[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Index c = 0; c < cells; ++c) {
      const double peak = hist.row(c).maxCoeff();
      if (peak > 0.0) hist.row(c) /= peak;
    }
    const Index offset = static_cast<Index>(g) * histogram_bins;
    for (Index i = 0; i < n; ++i) {
      features.row(i).segment(offset, histogram_bins) = hist.row(bins[static_cast<std::size_t>(i)]);
    }
  }
  return features;
}

Eigen::MatrixXd reflec_tta_features(const Eigen::Ref<const Points3d>& xyz,
                                    const Eigen::Ref<const Eigen::VectorXd>& reflectivity,
                                    const std::vector<BinResolution>& grids, int histogram_bins) {
  if (reflectivity.size() > 0 && (reflectivity.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "reflectivity must be non-negative");
  }
  if (!reflectivity.allFinite()) throw Error(ErrorCode::NonFiniteValue, "reflectivity contains NaN/Inf");
  return tta_features_normalized(xyz, normalize_unit(reflectivity), grids, histogram_bins);
}

}  // namespace lidarfeat
