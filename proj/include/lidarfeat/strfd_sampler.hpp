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
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lidarfeat/pc_io.hpp"
#include "lidarfeat/types.hpp"

namespace lidarfeat {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Mean structural similarity over every placement of the Gaussian window
/// that fits inside the image. Images smaller than the window use a window
/// shrunk to the smaller side (kept odd). Throws DimensionMismatch.
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params = {});

/// Sampling rate exp(-beta * x).
double supervisor_v(double x, double beta);

/// Named decay coefficients for target sampling ratios.
struct BetaPreset {
  std::string_view name;
  double beta;
};
inline constexpr BetaPreset kBetaPresets[] = {
    {"5%", 7.45}, {"10%", 5.72}, {"20%", 4.00}, {"40%", 2.28}, {"100%", 0.0},
};

enum class ImageSource { SsimRgb, SsimRange };

std::string_view to_string(ImageSource source);
ImageSource parse_image_source(std::string_view text);

/// Loads the comparison image of one frame.
using FrameImageLoader = std::function<GrayImage(const FrameEntry&)>;

/// Camera image for ssim-rgb, rendered range image for ssim-range.
FrameImageLoader make_image_loader(ImageSource source, const RangeProjectionParams& projection = {},
                                   double max_range = 80.0);

struct RedundancyScores {
  std::vector<double> psi;  // one per frame, in [0, 1]
  double mean = 0.0;
};

/// Per-frame similarity for a whole sequence: psi[j] = max(ssim(j, j + 1), 0);
/// the last frame reuses its predecessor's score, a lone frame scores 0.
/// Throws MissingImage when the loader cannot produce an image.
std::vector<double> sequence_redundancy(const FrameCatalog& catalog, const FrameImageLoader& loader, int threads = 1);

/// Scores of frames [begin, end) of the catalog, and their mean.
RedundancyScores subset_redundancy(const FrameCatalog& catalog, std::size_t begin, std::size_t end,
                                   const FrameImageLoader& loader);

/// Frame selection given per-frame scores. Frames are split into consecutive
/// subsets of q; each keeps ceil(v(mean psi) * size) frames with the lowest
/// psi, ties to the earlier frame. Returns sorted positions into `psi`.
std::vector<std::size_t> select_diverse_frames(const std::vector<double>& psi, int q, double beta);

struct SamplingPlan {
  int q = 0;
  double beta = 0.0;
  ImageSource source = ImageSource::SsimRgb;
  std::map<std::string, std::vector<std::int64_t>> sequences;  // sequence id -> frame indices
};

SamplingPlan strfd_sample(const std::vector<FrameCatalog>& catalogs, int q, double beta,
                          const FrameImageLoader& loader, ImageSource source, int threads = 1);

}  // namespace lidarfeat
