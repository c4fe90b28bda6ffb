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

#include <array>
#include <cstdint>
#include <vector>

namespace lidarfeat {

/// Shape of one sparse convolution layer for cost accounting. The grid
/// volume H*W*L is taken as the number of active output sites.
struct ConvLayerSpec {
  std::uint64_t in_channels = 1;   // M
  std::uint64_t out_channels = 1;  // N
  std::array<std::uint64_t, 3> kernel{1, 1, 1};
  std::array<std::uint64_t, 3> grid{1, 1, 1};
  std::uint64_t active_inputs = 1;  // a, mean active inputs per site

  std::uint64_t kernel_volume() const;  // D_K
  std::uint64_t grid_volume() const;
};

/// Throws InvalidArgument if a dimension is zero, a > D_K, or a count overflows.
void validate(const ConvLayerSpec& spec);

/// Submanifold sparse convolution: a*M*N per site, D_K*M*N weights.
std::uint64_t ssc_cost(const ConvLayerSpec& spec);
std::uint64_t ssc_params(const ConvLayerSpec& spec);

/// Depthwise (a*M per site, D_K*M weights) followed by pointwise (M*N each).
std::uint64_t sdsc_cost(const ConvLayerSpec& spec);
std::uint64_t sdsc_params(const ConvLayerSpec& spec);

/// sdsc / ssc; equal to 1/N + 1/a and 1/N + 1/D_K respectively.
double cost_ratio(const ConvLayerSpec& spec);
double param_ratio(const ConvLayerSpec& spec);

struct CostReport {
  std::uint64_t ssc_params = 0;
  std::uint64_t sdsc_params = 0;
  std::uint64_t ssc_cost = 0;
  std::uint64_t sdsc_cost = 0;

  double cost_ratio() const;
  double param_ratio() const;
};

CostReport layer_report(const ConvLayerSpec& spec);

/// Sums over a stack of layers.
CostReport stack_report(const std::vector<ConvLayerSpec>& layers);

}  // namespace lidarfeat
