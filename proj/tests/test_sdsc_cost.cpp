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
#include "lidarfeat/sdsc_cost.hpp"

using namespace lidarfeat;

namespace {

ConvLayerSpec layer(std::uint64_t m, std::uint64_t n, std::array<std::uint64_t, 3> kernel,
                    std::array<std::uint64_t, 3> grid, std::uint64_t a) {
  ConvLayerSpec s;
  s.in_channels = m;
  s.out_channels = n;
  s.kernel = kernel;
  s.grid = grid;
  s.active_inputs = a;
  return s;
}

}  // namespace

TEST(SdscCost, UnitLayer) {
  const ConvLayerSpec s;
  EXPECT_EQ(ssc_cost(s), 1u);
  EXPECT_EQ(sdsc_cost(s), 2u);
}

TEST(SdscCost, WorkedCounts) {
  const ConvLayerSpec s = layer(32, 64, {3, 3, 3}, {10, 10, 10}, 27);
  EXPECT_EQ(ssc_cost(s), 55'296'000u);
  EXPECT_EQ(ssc_params(s), 55'296u);
  EXPECT_EQ(sdsc_cost(s), 2'912'000u);
  EXPECT_EQ(sdsc_params(layer(32, 64, {1, 3, 1}, {1, 1, 1}, 1)), 2144u);
}

TEST(SdscCost, ResidualBlockReductions) {
  const double r131 = param_ratio(layer(32, 64, {1, 3, 1}, {1, 1, 1}, 3));
  EXPECT_NEAR(r131, 1.0 / 64 + 1.0 / 3, 1e-15);
  EXPECT_GE(1.0 / r131, 2.8);
  const double r313 = param_ratio(layer(512, 512, {3, 1, 3}, {1, 1, 1}, 9));
  EXPECT_GE(1.0 / r313, 7.9);
  EXPECT_NEAR(cost_ratio(layer(16, 64, {3, 3, 3}, {1, 1, 1}, 27)), 1.0 / 64 + 1.0 / 27, 1e-15);
}

TEST(SdscCost, RatiosMatchClosedFormOverSweep) {
  std::mt19937_64 rng(131);
  std::uniform_int_distribution<std::uint64_t> ch(1, 1024), dim(1, 7), g(1, 64);
  for (int i = 0; i < 2000; ++i) {
    ConvLayerSpec s = layer(ch(rng), ch(rng), {dim(rng), dim(rng), dim(rng)}, {g(rng), g(rng), g(rng)}, 1);
    s.active_inputs = std::uniform_int_distribution<std::uint64_t>(1, s.kernel_volume())(rng);
    const double n = static_cast<double>(s.out_channels);
    EXPECT_NEAR(cost_ratio(s), 1.0 / n + 1.0 / static_cast<double>(s.active_inputs), 1e-12);
    EXPECT_NEAR(param_ratio(s), 1.0 / n + 1.0 / static_cast<double>(s.kernel_volume()), 1e-12);
    EXPECT_GT(cost_ratio(s), 0.0);
    EXPECT_LE(cost_ratio(s), 2.0);
  }
}

TEST(SdscCost, RatiosDecreaseInN) {
  double prev = 3.0;
  for (std::uint64_t n = 1; n <= 256; n *= 2) {
    const double r = param_ratio(layer(8, n, {3, 3, 3}, {4, 4, 4}, 5));
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(SdscCost, Validation) {
  EXPECT_THROW(validate(layer(0, 1, {1, 1, 1}, {1, 1, 1}, 1)), Error);
  EXPECT_THROW(validate(layer(1, 1, {3, 1, 1}, {1, 1, 1}, 4)), Error);
  EXPECT_THROW(validate(layer(1, 1, {1, 1, 1}, {0, 1, 1}, 1)), Error);
  EXPECT_THROW(ssc_cost(layer(1u << 31, 1u << 31, {3, 3, 3}, {1024, 1024, 1024}, 27)), Error);
  EXPECT_NO_THROW(validate(layer(32, 64, {3, 3, 3}, {10, 10, 10}, 27)));
}

TEST(SdscCost, StackSums) {
  const std::vector<ConvLayerSpec> stack{layer(32, 64, {3, 3, 3}, {10, 10, 10}, 27),
                                         layer(64, 64, {1, 3, 1}, {10, 10, 10}, 3)};
  const CostReport total = stack_report(stack);
  const CostReport a = layer_report(stack[0]);
  const CostReport b = layer_report(stack[1]);
  EXPECT_EQ(total.ssc_params, a.ssc_params + b.ssc_params);
  EXPECT_EQ(total.sdsc_cost, a.sdsc_cost + b.sdsc_cost);
  EXPECT_DOUBLE_EQ(total.cost_ratio(),
                   static_cast<double>(total.sdsc_cost) / static_cast<double>(total.ssc_cost));
  EXPECT_DOUBLE_EQ(a.param_ratio(), param_ratio(stack[0]));
}
