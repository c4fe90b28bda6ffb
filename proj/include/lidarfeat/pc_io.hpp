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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lidarfeat/types.hpp"

namespace lidarfeat {

namespace fs = std::filesystem;

/// One LiDAR frame. Rows are (x, y, z, intensity) exactly as stored on disk,
/// so the matrix maps one-to-one onto a KITTI .bin record stream.
struct PointCloud {
  using Storage = Eigen::Matrix<float, Eigen::Dynamic, 4, Eigen::RowMajor>;

  Storage points;
  std::uint32_t frame_id = 0;

  Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  auto xyz() const { return points.leftCols<3>(); }
  auto intensity() const { return points.col(3); }
};

/// SemanticKITTI-style per-point labels.
struct LabelArray {
  std::vector<std::uint16_t> semantic;
  std::vector<std::uint16_t> instance;

  std::size_t size() const { return semantic.size(); }
};

struct FrameEntry {
  std::int64_t frame_index = 0;
  fs::path cloud_path;
  std::optional<fs::path> image_path;
  std::optional<fs::path> label_path;
};

/// Frames of one sequence in ascending frame_index order. Files whose stem is
/// not a decimal number are skipped and reported in `warnings`.
struct FrameCatalog {
  std::string sequence_id;
  std::vector<FrameEntry> frames;
  std::vector<std::string> warnings;
};

struct RangeProjectionParams {
  int height = 64;
  int width = 2048;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;
};

/// H x W range image in meters, 0 where no return landed.
struct RangeImage {
  Eigen::MatrixXf pixels;

  Index height() const { return pixels.rows(); }
  Index width() const { return pixels.cols(); }
};

inline constexpr char kFeatureMagic[4] = {'R', 'A', 'P', 'D'};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 2 + 4 + 4 + 4;

using FeatureMatrix = RowMatrix<float>;

struct FeatureFile {
  std::uint16_t version = kFeatureVersion;
  std::uint32_t k = 0;
  FeatureMatrix values;  // point_count x feature_width
};

PointCloud read_point_cloud(const fs::path& path, std::uint32_t frame_id = 0);
void write_point_cloud(const fs::path& path, const PointCloud& cloud);

LabelArray read_labels(const fs::path& path, std::size_t expected_count);
void write_labels(const fs::path& path, const LabelArray& labels);

/// Accepts flat directories of NNNNNN.bin files, KITTI sequence folders
/// (velodyne/, labels/, image_2/) and DurLAR drive folders
/// (ouster_points/data/, image_02/data/).
FrameCatalog scan_sequence(const fs::path& dir);

RangeImage project_range_image(const PointCloud& cloud, const RangeProjectionParams& params = {});

/// Linear 8-bit rendering of a range image: ranges at or beyond max_range map to 255.
GrayImage range_image_to_gray(const RangeImage& image, double max_range = 80.0);

void write_features(const fs::path& path, const FeatureMatrix& values, std::uint32_t k);
FeatureFile read_features(const fs::path& path);

/// 8-bit grayscale PGM (P5) or PNG. Colour PNGs are reduced to luma with
/// Rec. 601 weights.
GrayImage read_gray_image(const fs::path& path);
void write_pgm(const fs::path& path, const GrayImage& image);

}  // namespace lidarfeat
