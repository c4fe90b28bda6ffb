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

#include <vector>

#include <Eigen/Core>

#include "lidarfeat/types.hpp"

namespace lidarfeat {

/// Cylindrical grid over the ground plane: `radial_bins` rings spanning
/// [0, max planar radius of the frame] times `azimuth_bins` sectors of 360 deg.
struct BinResolution {
  int radial_bins = 20;
  int azimuth_bins = 40;
};

inline const std::vector<BinResolution> kDefaultTtaGrids = {{20, 40}, {40, 80}, {80, 120}};
inline constexpr int kDefaultHistogramBins = 10;

/// Flat bin id of every point for one resolution.
std::vector<int> assign_bins(const Eigen::Ref<const Points3d>& xyz, const BinResolution& grid);

/// Per-frame min-max normalisation onto [0, 1]; a constant input maps to 0.
Eigen::VectorXd normalize_unit(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Histogram features from reflectivity already on [0, 1]. For every
/// resolution, each occupied bin gets an N_b-bucket histogram (half-open
/// buckets, the last closed at 1) divided by its largest count; a point's
/// feature is its bins' histograms concatenated over the resolutions.
Eigen::MatrixXd tta_features_normalized(const Eigen::Ref<const Points3d>& xyz,
                                        const Eigen::Ref<const Eigen::VectorXd>& unit_reflectivity,
                                        const std::vector<BinResolution>& grids, int histogram_bins);

/// Raw reflectivity in, N x (grids.size() * histogram_bins) features out.
Eigen::MatrixXd reflec_tta_features(const Eigen::Ref<const Points3d>& xyz,
                                    const Eigen::Ref<const Eigen::VectorXd>& reflectivity,
                                    const std::vector<BinResolution>& grids = kDefaultTtaGrids,
                                    int histogram_bins = kDefaultHistogramBins);

}  // namespace lidarfeat
