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

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lidarfeat/error.hpp"
#include "lidarfeat/types.hpp"

namespace lidarfeat {

/// Euclidean distance of a point from the sensor origin.
template <typename Derived>
typename Derived::Scalar point_range(const Eigen::MatrixBase<Derived>& p) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3)
  return p.norm();
}

/// Per-point range for every row of an N x 3 block.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> point_ranges(const Eigen::MatrixBase<Derived>& xyz) {
  return xyz.rowwise().norm();
}

/// Range-normalised intensity R = I * r^2.
template <typename Scalar>
Scalar compute_reflectivity(Scalar intensity, Scalar range) {
  return intensity * range * range;
}

template <typename DerivedI, typename DerivedR>
auto compute_reflectivity(const Eigen::ArrayBase<DerivedI>& intensity, const Eigen::ArrayBase<DerivedR>& range) {
  return intensity * range.square();
}

struct CylindricalBin {
  std::int64_t theta_idx = 0;
  std::int64_t phi_idx = 0;

  friend bool operator==(const CylindricalBin&, const CylindricalBin&) = default;
};

/// Azimuth/elevation bin of a point for resolutions (dtheta, dphi) in radians.
/// Throws DegenerateOrigin for the zero point.
CylindricalBin cylindrical_bin(const Eigen::Vector3d& p, double dtheta, double dphi);

/// Points grouped by elevation band. Points at the origin carry no direction
/// and are listed in `excluded` instead of any ring.
struct RingPartition {
  int beam_count = 0;
  std::vector<std::vector<Index>> rings;
  std::vector<Index> excluded;
  Index scan_width = 0;  // ceil(covered points / beam_count)

  Index covered() const;
};

/// Ring index is clamp(phi_idx - phi_origin, 0, beams - 1).
RingPartition partition_rings(const Points3d& xyz, int beams, double dphi, std::int64_t phi_origin);

/// Elevation bin of the lowest beam for a sensor whose field of view starts at fov_down_deg.
std::int64_t ring_origin(double fov_down_deg, double dphi);

struct NeighborList {
  Index anchor_index = -1;
  std::vector<Index> neighbor_indices;
  std::vector<double> squared_distances;
};

/// Exact k-nearest-neighbour search over a fixed subset of a point set.
///
/// Points are bucketed into a uniform hash grid; a query visits cubic shells
/// of cells around the query cell and stops once the k-th candidate is
/// strictly closer than any unvisited cell. Subsets below 64 points are
/// scanned directly. Ordering is (squared distance, point index), so ties
/// always resolve to the lower index. The index copies the coordinates it
/// needs and is immutable after construction.
class NeighborIndex {
 public:
  static constexpr Index kBruteForceBelow = 64;

  NeighborIndex(const Points3d& points, std::span<const Index> subset);
  explicit NeighborIndex(const Points3d& points);

  Index size() const { return static_cast<Index>(ids_.size()); }

  /// k nearest members of the subset to the given member, excluding itself.
  NeighborList query(Index anchor_index, int k) const;

  /// k nearest members to an arbitrary location; `exclude` (a point index) is skipped.
  NeighborList query_point(const Eigen::Vector3d& location, int k, Index exclude = -1) const;

  double cell_size() const { return cell_; }

 private:
  void build_grid();

  Points3d coords_;            // subset coordinates, reordered by cell
  std::vector<Index> ids_;     // original index of each row of coords_
  std::vector<std::pair<Index, Index>> lookup_;  // (original index, row), sorted
  double cell_ = 1.0;
  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  Eigen::Array3i extent_ = Eigen::Array3i::Zero();
  std::vector<std::uint64_t> cell_keys_;
  std::vector<std::uint32_t> cell_begin_;
};

/// One-shot helper: exact k nearest neighbours of `anchor_index` within `subset`.
/// Throws InsufficientPoints when |subset| <= k.
NeighborList knn(const Points3d& points, std::span<const Index> subset, Index anchor_index, int k);

}  // namespace lidarfeat
