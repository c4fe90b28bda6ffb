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

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidarfeat/profile.hpp"

namespace lidarfeat::cli {

/// A flag combination the parser accepted but a command cannot use.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every flag of the tool. All subcommands share one set so a flat config
/// file can set any of them.
struct Options {
  std::string profile = "semantickitti";
  std::vector<std::string> inputs;
  std::string out;
  std::string mode = "r-rapid";
  std::optional<int> k_near;
  std::optional<int> k_mid;
  std::optional<int> k_far;
  std::optional<double> delta_max;
  std::optional<double> theta;
  double outlier = 0.25;
  double beta = 0.0;
  int q = 8;
  std::string source = "ssim-rgb";
  int threads = 1;
  std::string pred;
  std::string gt;
  bool raw_labels = false;
  double berhu_delta = 0.2;
};

/// Profile selected by --profile with the command-line overrides applied.
DatasetProfile resolve_profile(const Options& options);

void run_extract(const Options& options, std::ostream& out);
void run_sample(const Options& options, std::ostream& out);
void run_tta(const Options& options, std::ostream& out);
void run_eval_seg(const Options& options, std::ostream& out);
void run_eval_depth(const Options& options, std::ostream& out);
void run_sdsc_cost(const Options& options, std::ostream& out);
void run_reflectivity(const Options& options, std::ostream& out);

}  // namespace lidarfeat::cli
