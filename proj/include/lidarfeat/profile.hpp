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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lidarfeat/pc_io.hpp"
#include "lidarfeat/rapid_features.hpp"
#include "lidarfeat/reflec_tta.hpp"

namespace lidarfeat {

inline constexpr std::uint16_t kIgnoreLabel = 255;

/// Sensor and dataset constants shared by the command-line pipelines.
struct DatasetProfile {
  std::string name;
  int beams = 64;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;
  RangeKPolicy policy;
  RangeProjectionParams projection;
  std::vector<BinResolution> tta_grids = kDefaultTtaGrids;
  int histogram_bins = kDefaultHistogramBins;
  std::vector<std::string> class_names;
  /// Raw annotation id -> evaluation class id, or kIgnoreLabel. Empty when
  /// the dataset's labels are evaluation ids already.
  std::unordered_map<std::uint16_t, std::uint16_t> learning_map;

  double dphi() const;  // vertical bin width in radians
  std::int64_t phi_origin() const;
  int class_count() const { return static_cast<int>(class_names.size()); }

  /// Re-derives the range boundaries and checks every invariant.
  void finalize();
};

DatasetProfile semantickitti_profile();
DatasetProfile nuscenes_profile();
DatasetProfile custom_profile();

/// Throws InvalidArgument for unknown names.
DatasetProfile profile_by_name(std::string_view name);

/// Maps raw annotation ids through the profile's learning map; ids missing
/// from the map become kIgnoreLabel.
std::vector<std::uint16_t> map_labels(const DatasetProfile& profile, const std::vector<std::uint16_t>& raw);

}  // namespace lidarfeat
