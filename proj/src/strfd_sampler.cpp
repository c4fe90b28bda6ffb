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

#include "lidarfeat/strfd_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidarfeat/error.hpp"
#include "lidarfeat/parallel.hpp"

namespace lidarfeat {

namespace {

using ArrayXXdR = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(window));
  const int half = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - half;
    taps[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

/// Separable 'valid' correlation with a square kernel.
ArrayXXdR filter_valid(const ArrayXXdR& in, const std::vector<double>& taps) {
  const Index w = static_cast<Index>(taps.size());
  const Index rows = in.rows() - w + 1;
  const Index cols = in.cols() - w + 1;
  ArrayXXdR horizontal(in.rows(), cols);
  for (Index r = 0; r < in.rows(); ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Index t = 0; t < w; ++t) acc += taps[static_cast<std::size_t>(t)] * in(r, c + t);
      horizontal(r, c) = acc;
    }
  }
  ArrayXXdR out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Index t = 0; t < w; ++t) acc += taps[static_cast<std::size_t>(t)] * horizontal(r + t, c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                                  std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  if (a.size() == 0) throw Error(ErrorCode::EmptyInput, "ssim of empty images");
  int window = static_cast<int>(std::min<Index>({params.window, a.rows(), a.cols()}));
  if (window % 2 == 0) --window;
  const std::vector<double> taps = gaussian_taps(window, params.sigma);

  const ArrayXXdR x = a.cast<double>().array();
  const ArrayXXdR y = b.cast<double>().array();
  const ArrayXXdR mu_x = filter_valid(x, taps);
  const ArrayXXdR mu_y = filter_valid(y, taps);
  const ArrayXXdR xx = filter_valid(x * x, taps);
  const ArrayXXdR yy = filter_valid(y * y, taps);
  const ArrayXXdR xy = filter_valid(x * y, taps);

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);

  // Written so that swapping the images swaps operands of commutative
  // operations only; the result is then bitwise symmetric.
  double total = 0.0;
  for (Index i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x.data()[i];
    const double my = mu_y.data()[i];
    const double mxy = mx * my;
    const double var_x = xx.data()[i] - mx * mx;
    const double var_y = yy.data()[i] - my * my;
    const double cov = xy.data()[i] - mxy;
    const double num = (2.0 * mxy + c1) * (2.0 * cov + c2);
    const double den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_x.size());
}

double supervisor_v(double x, double beta) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
  return std::exp(-beta * x);
}

std::string_view to_string(ImageSource source) {
  return source == ImageSource::SsimRgb ? "ssim-rgb" : "ssim-range";
}

ImageSource parse_image_source(std::string_view text) {
  if (text == "ssim-rgb") return ImageSource::SsimRgb;
  if (text == "ssim-range") return ImageSource::SsimRange;
  throw Error(ErrorCode::InvalidArgument, "unknown image source '" + std::string(text) + "'");
}

FrameImageLoader make_image_loader(ImageSource source, const RangeProjectionParams& projection, double max_range) {
  if (source == ImageSource::SsimRgb) {
    return [](const FrameEntry& frame) {
      if (!frame.image_path) {
        throw Error(ErrorCode::MissingImage, "frame " + std::to_string(frame.frame_index) + " (" +
                                                 frame.cloud_path.string() + ") has no paired image");
      }
      try {
        return read_gray_image(*frame.image_path);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::FileNotFound) throw Error(ErrorCode::MissingImage, frame.image_path->string());
        throw;
      }
    };
  }
  return [projection, max_range](const FrameEntry& frame) {
    return range_image_to_gray(project_range_image(read_point_cloud(frame.cloud_path), projection), max_range);
  };
}

std::vector<double> sequence_redundancy(const FrameCatalog& catalog, const FrameImageLoader& loader, int threads) {
  const std::size_t p = catalog.frames.size();
  std::vector<double> psi(p, 0.0);
  if (p < 2) {
    if (p == 1) loader(catalog.frames[0]);  // surface a missing image even for a lone frame
    return psi;
  }
  parallel_for(static_cast<Index>(p - 1), threads, [&](Index begin, Index end) {
    GrayImage current = loader(catalog.frames[static_cast<std::size_t>(begin)]);
    for (Index j = begin; j < end; ++j) {
      GrayImage next = loader(catalog.frames[static_cast<std::size_t>(j + 1)]);
      psi[static_cast<std::size_t>(j)] = std::max(ssim(current, next), 0.0);
      current = std::move(next);
    }
  });
  psi[p - 1] = psi[p - 2];
  return psi;
}

RedundancyScores subset_redundancy(const FrameCatalog& catalog, std::size_t begin, std::size_t end,
                                   const FrameImageLoader& loader) {
  const std::size_t p = catalog.frames.size();
  if (begin >= end || end > p) throw Error(ErrorCode::InvalidArgument, "subset must be a non-empty frame range");
  RedundancyScores scores;
  auto pair_score = [&](std::size_t j) {
    return std::max(ssim(loader(catalog.frames[j]), loader(catalog.frames[j + 1])), 0.0);
  };
  for (std::size_t j = begin; j < end; ++j) {
    if (j + 1 < p) {
      scores.psi.push_back(pair_score(j));
    } else if (j > 0) {
      scores.psi.push_back(j > begin ? scores.psi.back() : pair_score(j - 1));
    } else {
      loader(catalog.frames[j]);
      scores.psi.push_back(0.0);
    }
  }
  scores.mean = std::accumulate(scores.psi.begin(), scores.psi.end(), 0.0) / static_cast<double>(scores.psi.size());
  return scores;
}

std::vector<std::size_t> select_diverse_frames(const std::vector<double>& psi, int q, double beta) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "subset size q must be at least 1");
  std::vector<std::size_t> chosen;
  for (std::size_t begin = 0; begin < psi.size(); begin += static_cast<std::size_t>(q)) {
    const std::size_t end = std::min(psi.size(), begin + static_cast<std::size_t>(q));
    const std::size_t s = end - begin;
    const double mean = std::accumulate(psi.begin() + static_cast<std::ptrdiff_t>(begin),
                                        psi.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
                        static_cast<double>(s);
    // Guard against exp() landing a few ulps above an exact integer.
    const double quota = supervisor_v(mean, beta) * static_cast<double>(s);
    const auto k = static_cast<std::size_t>(std::clamp(std::ceil(quota - 1e-9), 1.0, static_cast<double>(s)));

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return psi[a] < psi[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    chosen.insert(chosen.end(), order.begin(), order.end());
  }
  return chosen;
}

SamplingPlan strfd_sample(const std::vector<FrameCatalog>& catalogs, int q, double beta,
                          const FrameImageLoader& loader, ImageSource source, int threads) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "subset size q must be at least 1");
  if (!(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
  if (catalogs.empty()) throw Error(ErrorCode::EmptySequence, "no sequences to sample");
  SamplingPlan plan;
  plan.q = q;
  plan.beta = beta;
  plan.source = source;
  for (const FrameCatalog& catalog : catalogs) {
    if (catalog.frames.empty()) throw Error(ErrorCode::EmptySequence, "sequence " + catalog.sequence_id);
    if (plan.sequences.contains(catalog.sequence_id)) {
      throw Error(ErrorCode::InvalidArgument, "duplicate sequence id " + catalog.sequence_id);
    }
    const std::vector<double> psi = sequence_redundancy(catalog, loader, threads);
    std::vector<std::int64_t>& frames = plan.sequences[catalog.sequence_id];
    for (std::size_t pos : select_diverse_frames(psi, q, beta)) frames.push_back(catalog.frames[pos].frame_index);
  }
  return plan;
}

}  // namespace lidarfeat
