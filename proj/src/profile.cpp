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

#include "lidarfeat/profile.hpp"

#include <cmath>

#include "lidarfeat/error.hpp"

namespace lidarfeat {

double DatasetProfile::dphi() const { return deg_to_rad(fov_up_deg - fov_down_deg) / beams; }

std::int64_t DatasetProfile::phi_origin() const { return ring_origin(fov_down_deg, dphi()); }

void DatasetProfile::finalize() {
  if (beams < 1) throw Error(ErrorCode::InvalidArgument, "beam count must be positive");
  if (!(fov_up_deg > fov_down_deg)) throw Error(ErrorCode::InvalidArgument, "fov_up must exceed fov_down");
  if (histogram_bins < 1) throw Error(ErrorCode::InvalidArgument, "histogram bin count must be positive");
  policy = RangeKPolicy::from_resolution(policy.k_close, policy.k_mid, policy.k_far, policy.theta_deg,
                                         policy.delta_max);
  policy.validate();
  projection.fov_up_deg = fov_up_deg;
  projection.fov_down_deg = fov_down_deg;
}

DatasetProfile semantickitti_profile() {
  DatasetProfile p;
  p.name = "semantickitti";
  p.beams = 64;
  p.fov_up_deg = 3.0;
  p.fov_down_deg = -25.0;
  p.policy.k_close = 10;
  p.policy.k_mid = 7;
  p.policy.k_far = 5;
  p.policy.theta_deg = 0.09;
  p.policy.delta_max = 0.25;
  p.projection.height = 64;
  p.projection.width = 2048;
  p.class_names = {"car",      "bicycle",  "motorcycle",   "truck",    "other-vehicle", "person",     "bicyclist",
                   "motorcyclist", "road", "parking",      "sidewalk", "other-ground",  "building",   "fence",
                   "vegetation",   "trunk", "terrain",     "pole",     "traffic-sign"};
  // Raw ids of the annotation tool; moving variants fold into their static class.
  p.learning_map = {{0, kIgnoreLabel}, {1, kIgnoreLabel}, {10, 0},  {11, 1},  {13, 4},  {15, 2},  {16, 4},
                    {18, 3},           {20, 4},           {30, 5},  {31, 6},  {32, 7},  {40, 8},  {44, 9},
                    {48, 10},          {49, 11},          {50, 12}, {51, 13}, {52, kIgnoreLabel}, {60, 8},
                    {70, 14},          {71, 15},          {72, 16}, {80, 17}, {81, 18}, {99, kIgnoreLabel},
                    {252, 0},          {253, 6},          {254, 5}, {255, 7}, {256, 4}, {257, 4}, {258, 3},
                    {259, 4}};
  p.finalize();
  return p;
}

DatasetProfile nuscenes_profile() {
  DatasetProfile p;
  p.name = "nuscenes";
  p.beams = 32;
  p.fov_up_deg = 10.67;
  p.fov_down_deg = -30.67;
  p.policy.k_close = 8;
  p.policy.k_mid = 6;
  p.policy.k_far = 3;
  p.policy.theta_deg = 0.2;
  p.policy.delta_max = 0.25;
  p.projection.height = 32;
  p.projection.width = 1024;
  p.class_names = {"barrier",    "bicycle",    "bus",      "car",     "construction-vehicle", "motorcycle",
                   "pedestrian", "traffic-cone", "trailer", "truck",  "driveable-surface",    "other-flat",
                   "sidewalk",   "terrain",    "manmade",  "vegetation"};
  p.finalize();
  return p;
}

DatasetProfile custom_profile() {
  DatasetProfile p = semantickitti_profile();
  p.name = "custom";
  p.learning_map.clear();
  return p;
}

DatasetProfile profile_by_name(std::string_view name) {
  if (name == "semantickitti") return semantickitti_profile();
  if (name == "nuscenes") return nuscenes_profile();
  if (name == "custom") return custom_profile();
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + std::string(name) + "'");
}

std::vector<std::uint16_t> map_labels(const DatasetProfile& profile, const std::vector<std::uint16_t>& raw) {
  std::vector<std::uint16_t> out;
  out.reserve(raw.size());
  for (std::uint16_t id : raw) {
    const auto it = profile.learning_map.find(id);
    out.push_back(it == profile.learning_map.end() ? kIgnoreLabel : it->second);
  }
  return out;
}

}  // namespace lidarfeat
