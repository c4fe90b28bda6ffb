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

#include "lidarfeat/geometry.hpp"

#include <algorithm>

namespace lidarfeat {

CylindricalBin cylindrical_bin(const Eigen::Vector3d& p, double dtheta, double dphi) {
  if (!(dtheta > 0.0) || !(dphi > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "angular resolutions must be positive");
  }
  const double r2 = p.squaredNorm();
  if (r2 == 0.0) {
    throw Error(ErrorCode::DegenerateOrigin, "the origin has no azimuth or elevation");
  }
  const double elevation = std::asin(std::clamp(p.z() / std::sqrt(r2), -1.0, 1.0));
  return {static_cast<std::int64_t>(std::floor(std::atan2(p.y(), p.x()) / dtheta)),
          static_cast<std::int64_t>(std::floor(elevation / dphi))};
}

Index RingPartition::covered() const {
  Index total = 0;
  for (const auto& ring : rings) total += static_cast<Index>(ring.size());
  return total;
}

std::int64_t ring_origin(double fov_down_deg, double dphi) {
  if (!(dphi > 0.0)) throw Error(ErrorCode::InvalidArgument, "dphi must be positive");
  return static_cast<std::int64_t>(std::floor(deg_to_rad(fov_down_deg) / dphi));
}

RingPartition partition_rings(const Points3d& xyz, int beams, double dphi, std::int64_t phi_origin) {
  if (beams <= 0) throw Error(ErrorCode::InvalidArgument, "beam count must be positive");
  if (!(dphi > 0.0)) throw Error(ErrorCode::InvalidArgument, "dphi must be positive");

  RingPartition partition;
  partition.beam_count = beams;
  partition.rings.resize(static_cast<std::size_t>(beams));
  for (Index i = 0; i < xyz.rows(); ++i) {
    const Eigen::Vector3d p = xyz.row(i).transpose();
    const double r2 = p.squaredNorm();
    if (r2 == 0.0) {
      partition.excluded.push_back(i);
      continue;
    }
    const double elevation = std::asin(std::clamp(p.z() / std::sqrt(r2), -1.0, 1.0));
    const auto phi_idx = static_cast<std::int64_t>(std::floor(elevation / dphi));
    const auto ring = std::clamp<std::int64_t>(phi_idx - phi_origin, 0, beams - 1);
    partition.rings[static_cast<std::size_t>(ring)].push_back(i);
  }
  partition.scan_width = (partition.covered() + beams - 1) / beams;
  return partition;
}

}  // namespace lidarfeat
