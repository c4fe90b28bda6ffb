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

#include "lidarfeat/cli.hpp"

#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lidarfeat/error.hpp"

namespace lidarfeat {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  cli::Options opt;
  CLI::App app{"LiDAR point-cloud features, frame sampling and evaluation"};
  app.name("lidarfeat");
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

  app.add_option("--profile", opt.profile, "Dataset profile")
      ->check(CLI::IsMember({"semantickitti", "nuscenes", "custom"}))
      ->capture_default_str();
  app.add_option("--in", opt.inputs, "Input sequence directory or file (repeatable for sample)");
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--mode", opt.mode, "Feature mode")
      ->check(CLI::IsMember({"r-rapid", "c-rapid", "mnps"}))
      ->capture_default_str();
  app.add_option("--k-near", opt.k_near, "Neighbourhood size below the first range boundary");
  app.add_option("--k-mid", opt.k_mid, "Neighbourhood size between the range boundaries");
  app.add_option("--k-far", opt.k_far, "Neighbourhood size beyond the second range boundary");
  app.add_option("--delta-max", opt.delta_max, "Largest tolerated neighbour gap in meters")->check(CLI::PositiveNumber);
  app.add_option("--theta", opt.theta, "Azimuth resolution in degrees")->check(CLI::PositiveNumber);
  app.add_option("--outlier", opt.outlier, "Distance above which features saturate to 1")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--beta", opt.beta, "Sampling decay coefficient")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--q", opt.q, "Frames per sampling subset")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--source", opt.source, "Redundancy image source")
      ->check(CLI::IsMember({"ssim-rgb", "ssim-range"}))
      ->capture_default_str();
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--pred", opt.pred, "Predicted label file or directory");
  app.add_option("--gt", opt.gt, "Ground-truth label file or directory");
  app.add_flag("--raw-labels", opt.raw_labels, "Map annotation ids through the profile's learning map");
  app.add_option("--berhu-delta", opt.berhu_delta, "Berhu threshold")->check(CLI::PositiveNumber)->capture_default_str();

  using Command = std::function<void(const cli::Options&, std::ostream&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"extract", {"Per-point RAPiD features for every frame of a sequence", cli::run_extract}},
      {"sample", {"Diversity-driven frame sampling plan", cli::run_sample}},
      {"tta", {"Reflectivity histogram features", cli::run_tta}},
      {"eval-seg", {"Per-class IoU and mIoU of predicted labels", cli::run_eval_seg}},
      {"eval-depth", {"Depth metrics from a CSV of gt,pred pairs", cli::run_eval_depth}},
      {"sdsc-cost", {"Parameter and multiply-add accounting for sparse convolution layers", cli::run_sdsc_cost}},
      {"reflectivity", {"Clouds augmented with reflectivity I*r^2", cli::run_reflectivity}},
  };
  std::map<std::string, CLI::App*> subcommands;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->fallthrough();
    subcommands[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "lidarfeat: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    for (const auto& [name, sub] : subcommands) {
      if (sub->parsed()) commands.at(name).second(opt, out);
    }
  } catch (const cli::UsageError& e) {
    err << "lidarfeat: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "lidarfeat: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace lidarfeat
