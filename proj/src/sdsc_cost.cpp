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

#include "lidarfeat/sdsc_cost.hpp"

#include "lidarfeat/error.hpp"

namespace lidarfeat {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::InvalidArgument, "layer cost overflows 64 bits");
  return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::InvalidArgument, "layer cost overflows 64 bits");
  return out;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::uint64_t ConvLayerSpec::kernel_volume() const { return mul(mul(kernel[0], kernel[1]), kernel[2]); }

std::uint64_t ConvLayerSpec::grid_volume() const { return mul(mul(grid[0], grid[1]), grid[2]); }

void validate(const ConvLayerSpec& spec) {
  if (spec.in_channels == 0 || spec.out_channels == 0 || spec.active_inputs == 0) {
    throw Error(ErrorCode::InvalidArgument, "channel counts and active inputs must be at least 1");
  }
  for (std::uint64_t d : spec.kernel) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "kernel dimensions must be at least 1");
  }
  for (std::uint64_t d : spec.grid) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "grid dimensions must be at least 1");
  }
  if (spec.active_inputs > spec.kernel_volume()) {
    throw Error(ErrorCode::InvalidArgument, "active inputs exceed the kernel volume");
  }
  ssc_cost(spec);  // overflow probes
  ssc_params(spec);
  sdsc_cost(spec);
  sdsc_params(spec);
}

std::uint64_t ssc_cost(const ConvLayerSpec& spec) {
  return mul(mul(mul(spec.active_inputs, spec.in_channels), spec.out_channels), spec.grid_volume());
}

std::uint64_t ssc_params(const ConvLayerSpec& spec) {
  return mul(mul(spec.kernel_volume(), spec.in_channels), spec.out_channels);
}

std::uint64_t sdsc_cost(const ConvLayerSpec& spec) {
  const std::uint64_t per_site =
      add(mul(spec.active_inputs, spec.in_channels), mul(spec.in_channels, spec.out_channels));
  return mul(per_site, spec.grid_volume());
}

std::uint64_t sdsc_params(const ConvLayerSpec& spec) {
  return add(mul(spec.kernel_volume(), spec.in_channels), mul(spec.in_channels, spec.out_channels));
}

double cost_ratio(const ConvLayerSpec& spec) { return ratio(sdsc_cost(spec), ssc_cost(spec)); }

double param_ratio(const ConvLayerSpec& spec) { return ratio(sdsc_params(spec), ssc_params(spec)); }

double CostReport::cost_ratio() const { return ratio(sdsc_cost, ssc_cost); }

double CostReport::param_ratio() const { return ratio(sdsc_params, ssc_params); }

CostReport layer_report(const ConvLayerSpec& spec) {
  validate(spec);
  return {ssc_params(spec), sdsc_params(spec), ssc_cost(spec), sdsc_cost(spec)};
}

CostReport stack_report(const std::vector<ConvLayerSpec>& layers) {
  CostReport total;
  for (const ConvLayerSpec& spec : layers) {
    const CostReport layer = layer_report(spec);
    total.ssc_params = add(total.ssc_params, layer.ssc_params);
    total.sdsc_params = add(total.sdsc_params, layer.sdsc_params);
    total.ssc_cost = add(total.ssc_cost, layer.ssc_cost);
    total.sdsc_cost = add(total.sdsc_cost, layer.sdsc_cost);
  }
  return total;
}

}  // namespace lidarfeat
