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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lidarfeat/geometry.hpp"
#include "lidarfeat/pc_io.hpp"
#include "lidarfeat/types.hpp"

namespace lidarfeat {

/// Geometry plus the per-point attributes RAPiD consumes. `range` and
/// `reflectivity` are sensor-frame measurements: moving the coordinates with a
/// rigid transform leaves them untouched, which is what makes the features
/// isometry invariant end to end.
struct RapidCloud {
  Points3d xyz;
  Eigen::VectorXd reflectivity;
  Eigen::VectorXd range;

  Index size() const { return xyz.rows(); }
};

/// Builds a RapidCloud from a raw frame: range = |p|, reflectivity = I * r^2.
RapidCloud prepare_rapid_cloud(const PointCloud& cloud);

struct ReflectivityScale {
  double r_min = 0.0;
  double r_max = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
};

/// Reflectivity extremes over the region and 3D distance extremes over all of
/// its point pairs. Throws TooFewPoints below two points.
ReflectivityScale reflectivity_scale(const Eigen::Ref<const Points3d>& xyz,
                                     const Eigen::Ref<const Eigen::VectorXd>& reflectivity);

/// Maps reflectivity linearly onto [d_min, d_max]. A constant reflectivity
/// range maps everything to d_min.
inline double reflectivity_map(double r, const ReflectivityScale& scale) {
  if (scale.r_max == scale.r_min) return scale.d_min;
  return (r - scale.r_min) / (scale.r_max - scale.r_min) * (scale.d_max - scale.d_min) + scale.d_min;
}

/// sqrt(|p_j - p_l|^2 + (g(r_j) - g(r_l))^2).
template <typename DerivedA, typename DerivedB>
double pair_distance_4d(const Eigen::MatrixBase<DerivedA>& p_j, const Eigen::MatrixBase<DerivedB>& p_l, double r_j,
                        double r_l, const ReflectivityScale& scale) {
  const double dg = reflectivity_map(r_j, scale) - reflectivity_map(r_l, scale);
  return std::sqrt((p_j - p_l).squaredNorm() + dg * dg);
}

/// u x k matrix of 4D pair distances: row j holds the distances from point j
/// to its k nearest (3D) neighbours in the region, each row ascending and the
/// rows in lexicographic order.
struct RapidMatrix {
  Eigen::MatrixXd values;
  bool clamped_k = false;  // k was reduced to |region| - 1

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Double-sorted distance matrix before outlier handling and normalisation.
RapidMatrix sorted_distance_matrix(const Eigen::Ref<const Points3d>& xyz,
                                   const Eigen::Ref<const Eigen::VectorXd>& reflectivity, int k);

/// Entries above `outlier_threshold` are pinned to 1; the remaining entries are
/// min-max normalised onto [0, 1]. Monotone, so row and lexicographic order survive.
void normalize_rapid(Eigen::MatrixXd& values, double outlier_threshold);

/// sorted_distance_matrix followed by normalize_rapid.
RapidMatrix rapid_matrix(const Eigen::Ref<const Points3d>& xyz, const Eigen::Ref<const Eigen::VectorXd>& reflectivity,
                         int k, double outlier_threshold);

/// Range at which k - 1 azimuth steps of theta span delta_max:
/// delta_max = 2 (k - 1) R sin(theta / 2). Theta in radians.
double range_boundary(int k, double theta_rad, double delta_max);

struct RangeKPolicy {
  int k_close = 10;
  int k_mid = 7;
  int k_far = 5;
  double theta_deg = 0.09;
  double delta_max = 0.25;
  double boundary_close_mid = 0.0;
  double boundary_mid_far = 0.0;

  /// Boundaries derived from range_boundary(k_close) and range_boundary(k_mid).
  static RangeKPolicy from_resolution(int k_close, int k_mid, int k_far, double theta_deg, double delta_max);

  /// Throws InvalidArgument unless k_close >= k_mid >= k_far >= 2 and the
  /// boundaries are ordered.
  void validate() const;

  int max_k() const { return k_close; }
  int feature_width() const { return k_close * (k_close - 1); }
};

int select_k(double range, const RangeKPolicy& policy);

enum RowFlag : std::uint8_t {
  kRowOk = 0,
  kRowDegenerate = 1,  // group with <= 1 point; row is all zeros
  kRowClampedK = 2,    // group smaller than the policy's k
};

/// Per-anchor MNPS rows. Row i describes `anchor[i]`; entries past
/// k[i] * (k[i] - 1) are zero padding.
struct StackedFeatures {
  Eigen::MatrixXd values;
  std::vector<Index> anchor;
  std::vector<int> k;
  std::vector<std::uint8_t> flags;

  Index rows() const { return values.rows(); }
  int feature_width() const { return static_cast<int>(values.cols()); }
};

struct ExtractOptions {
  double outlier_threshold = 0.25;
  int threads = 1;
};

/// MNPS features with the neighbour window confined to each group. Rows are
/// emitted group by group in the order given, anchors ascending within a
/// group; points that belong to no group follow as degenerate rows.
StackedFeatures mnps_features(const RapidCloud& cloud, const std::vector<std::vector<Index>>& groups,
                              const RangeKPolicy& policy, const ExtractOptions& options = {});

/// Intra-ring features.
StackedFeatures r_rapid(const RapidCloud& cloud, const RingPartition& rings, const RangeKPolicy& policy,
                        const ExtractOptions& options = {});

/// Intra-class features; groups are the label values in ascending order.
StackedFeatures c_rapid(const RapidCloud& cloud, std::span<const std::uint16_t> labels, const RangeKPolicy& policy,
                        const ExtractOptions& options = {});

/// Unconfined MNPS: the whole cloud is a single region.
StackedFeatures mnps_rapid(const RapidCloud& cloud, const RangeKPolicy& policy, const ExtractOptions& options = {});

/// Feature rows in anchor order (row i belongs to point i), as float for persistence.
FeatureMatrix to_point_order(const StackedFeatures& features, Index point_count);

}  // namespace lidarfeat
