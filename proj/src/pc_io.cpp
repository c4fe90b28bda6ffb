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

#include "lidarfeat/pc_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "lidarfeat/error.hpp"
#include "little_endian.hpp"

namespace lidarfeat {

namespace {

std::vector<char> slurp(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> bytes(size);
  in.seekg(0, std::ios::beg);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::IoFailure, "short read on " + path.string());
  }
  return bytes;
}

void spill(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
  }
}

std::optional<std::int64_t> parse_frame_index(const std::string& stem) {
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value);
  if (ec != std::errc() || ptr != stem.data() + stem.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<fs::path> first_existing(const fs::path& dir, const std::string& stem,
                                       std::initializer_list<const char*> extensions) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return std::nullopt;
  for (const char* ext : extensions) {
    fs::path candidate = dir / (stem + ext);
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  return std::nullopt;
}

struct SequenceLayout {
  fs::path clouds;
  std::vector<fs::path> images;
  std::vector<fs::path> labels;
};

SequenceLayout detect_layout(const fs::path& dir) {
  std::error_code ec;
  if (fs::is_directory(dir / "velodyne", ec)) {
    return {dir / "velodyne", {dir / "image_2", dir / "image_0"}, {dir / "labels"}};
  }
  if (fs::is_directory(dir / "ouster_points" / "data", ec)) {
    return {dir / "ouster_points" / "data",
            {dir / "image_02" / "data", dir / "image_01" / "data"},
            {dir / "labels"}};
  }
  return {dir, {dir, dir / "image_2"}, {dir, dir / "labels"}};
}

}  // namespace

PointCloud read_point_cloud(const fs::path& path, std::uint32_t frame_id) {
  const std::vector<char> bytes = slurp(path);
  if (bytes.size() % 16 != 0) {
    std::ostringstream msg;
    msg << path.string() << ": size " << bytes.size() << " is not a multiple of 16 (trailing record at byte offset "
        << (bytes.size() / 16) * 16 << ")";
    throw Error(ErrorCode::MalformedFile, msg.str());
  }
  PointCloud cloud;
  cloud.frame_id = frame_id;
  const Index n = static_cast<Index>(bytes.size() / 16);
  cloud.points.resize(n, 4);
  for (Index i = 0; i < n; ++i) {
    for (int c = 0; c < 4; ++c) {
      const std::size_t offset = static_cast<std::size_t>(i) * 16 + static_cast<std::size_t>(c) * 4;
      const float v = detail::load_le<float>(bytes.data() + offset);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << path.string() << ": non-finite value at byte offset " << offset;
        throw Error(ErrorCode::NonFiniteValue, msg.str());
      }
      cloud.points(i, c) = v;
    }
  }
  return cloud;
}

void write_point_cloud(const fs::path& path, const PointCloud& cloud) {
  std::vector<char> bytes(static_cast<std::size_t>(cloud.size()) * 16);
  for (Index i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 4; ++c) {
      detail::store_le<float>(bytes.data() + static_cast<std::size_t>(i) * 16 + static_cast<std::size_t>(c) * 4,
                              cloud.points(i, c));
    }
  }
  spill(path, bytes);
}

LabelArray read_labels(const fs::path& path, std::size_t expected_count) {
  const std::vector<char> bytes = slurp(path);
  if (bytes.size() % 4 != 0) {
    std::ostringstream msg;
    msg << path.string() << ": size " << bytes.size() << " is not a multiple of 4";
    throw Error(ErrorCode::MalformedFile, msg.str());
  }
  const std::size_t n = bytes.size() / 4;
  if (n != expected_count) {
    std::ostringstream msg;
    msg << path.string() << ": " << n << " labels, expected " << expected_count;
    throw Error(ErrorCode::LengthMismatch, msg.str());
  }
  LabelArray labels;
  labels.semantic.resize(n);
  labels.instance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t record = detail::load_le<std::uint32_t>(bytes.data() + i * 4);
    labels.semantic[i] = static_cast<std::uint16_t>(record & 0xFFFFu);
    labels.instance[i] = static_cast<std::uint16_t>(record >> 16);
  }
  return labels;
}

void write_labels(const fs::path& path, const LabelArray& labels) {
  if (labels.semantic.size() != labels.instance.size()) {
    throw Error(ErrorCode::LengthMismatch, "semantic and instance arrays differ in length");
  }
  std::vector<char> bytes(labels.size() * 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t record =
        static_cast<std::uint32_t>(labels.semantic[i]) | (static_cast<std::uint32_t>(labels.instance[i]) << 16);
    detail::store_le<std::uint32_t>(bytes.data() + i * 4, record);
  }
  spill(path, bytes);
}

FrameCatalog scan_sequence(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::FileNotFound, "not a directory: " + dir.string());
  }
  const SequenceLayout layout = detect_layout(dir);

  FrameCatalog catalog;
  catalog.sequence_id = fs::absolute(dir).lexically_normal().filename().string();
  if (catalog.sequence_id.empty()) {
    catalog.sequence_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  }

  for (const auto& entry : fs::directory_iterator(layout.clouds)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bin") continue;
    const std::string stem = entry.path().stem().string();
    const auto index = parse_frame_index(stem);
    if (!index) {
      catalog.warnings.push_back("skipped non-numeric cloud file " + entry.path().filename().string());
      continue;
    }
    FrameEntry frame;
    frame.frame_index = *index;
    frame.cloud_path = entry.path();
    for (const auto& image_dir : layout.images) {
      if ((frame.image_path = first_existing(image_dir, stem, {".png", ".pgm"}))) break;
    }
    for (const auto& label_dir : layout.labels) {
      if ((frame.label_path = first_existing(label_dir, stem, {".label"}))) break;
    }
    catalog.frames.push_back(std::move(frame));
  }

  if (catalog.frames.empty()) {
    throw Error(ErrorCode::EmptySequence, "no cloud files in " + layout.clouds.string());
  }
  std::sort(catalog.frames.begin(), catalog.frames.end(),
            [](const FrameEntry& a, const FrameEntry& b) { return a.frame_index < b.frame_index; });
  for (std::size_t i = 1; i < catalog.frames.size(); ++i) {
    if (catalog.frames[i].frame_index == catalog.frames[i - 1].frame_index) {
      throw Error(ErrorCode::MalformedFile, "duplicate frame index in " + layout.clouds.string() + ": " +
                                                catalog.frames[i].cloud_path.filename().string());
    }
  }
  return catalog;
}

RangeImage project_range_image(const PointCloud& cloud, const RangeProjectionParams& params) {
  if (params.height <= 0 || params.width <= 0) {
    throw Error(ErrorCode::InvalidArgument, "range image dimensions must be positive");
  }
  if (!(params.fov_up_deg > params.fov_down_deg)) {
    throw Error(ErrorCode::InvalidArgument, "fov_up must exceed fov_down");
  }
  RangeImage image;
  image.pixels.setZero(params.height, params.width);

  const double fov_down = deg_to_rad(params.fov_down_deg);
  const double fov = deg_to_rad(params.fov_up_deg) - fov_down;
  const double H = params.height;
  const double W = params.width;

  for (Index i = 0; i < cloud.size(); ++i) {
    const double x = cloud.points(i, 0);
    const double y = cloud.points(i, 1);
    const double z = cloud.points(i, 2);
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r == 0.0) continue;  // no direction
    const double elevation = std::asin(std::clamp(z / r, -1.0, 1.0));
    const double u = std::floor(0.5 * (1.0 - std::atan2(y, x) / std::numbers::pi) * W);
    const double v = std::floor((1.0 - (elevation - fov_down) / fov) * H);
    const Index col = static_cast<Index>(std::clamp(u, 0.0, W - 1.0));
    const Index row = static_cast<Index>(std::clamp(v, 0.0, H - 1.0));
    float& pixel = image.pixels(row, col);
    const float range = static_cast<float>(r);
    if (pixel == 0.0f || range < pixel) pixel = range;
  }
  return image;
}

GrayImage range_image_to_gray(const RangeImage& image, double max_range) {
  if (!(max_range > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "max_range must be positive");
  }
  GrayImage gray(image.height(), image.width());
  for (Index r = 0; r < image.height(); ++r) {
    for (Index c = 0; c < image.width(); ++c) {
      const double v = std::min(static_cast<double>(image.pixels(r, c)), max_range) / max_range;
      gray(r, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return gray;
}

void write_features(const fs::path& path, const FeatureMatrix& values, std::uint32_t k) {
  if (!values.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "feature matrix contains NaN/Inf");
  }
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (values.rows() > kMax || values.cols() > kMax) {
    throw Error(ErrorCode::InvalidArgument, "feature matrix too large for the file header");
  }
  const std::size_t count = static_cast<std::size_t>(values.size());
  std::vector<char> bytes(kFeatureHeaderBytes + count * 4);
  char* out = bytes.data();
  std::memcpy(out, kFeatureMagic, 4);
  detail::store_le<std::uint16_t>(out + 4, kFeatureVersion);
  detail::store_le<std::uint32_t>(out + 6, static_cast<std::uint32_t>(values.rows()));
  detail::store_le<std::uint32_t>(out + 10, k);
  detail::store_le<std::uint32_t>(out + 14, static_cast<std::uint32_t>(values.cols()));
  const float* src = values.data();
  for (std::size_t i = 0; i < count; ++i) {
    detail::store_le<float>(out + kFeatureHeaderBytes + i * 4, src[i]);
  }
  spill(path, bytes);
}

FeatureFile read_features(const fs::path& path) {
  const std::vector<char> bytes = slurp(path);
  if (bytes.size() < kFeatureHeaderBytes) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": truncated header");
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": bad magic at byte offset 0");
  }
  FeatureFile file;
  file.version = detail::load_le<std::uint16_t>(bytes.data() + 4);
  if (file.version != kFeatureVersion) {
    throw Error(ErrorCode::MalformedFile,
                path.string() + ": unsupported version " + std::to_string(file.version) + " at byte offset 4");
  }
  const std::uint32_t rows = detail::load_le<std::uint32_t>(bytes.data() + 6);
  file.k = detail::load_le<std::uint32_t>(bytes.data() + 10);
  const std::uint32_t cols = detail::load_le<std::uint32_t>(bytes.data() + 14);
  const std::size_t expected = kFeatureHeaderBytes + static_cast<std::size_t>(rows) * cols * 4;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << path.string() << ": header claims " << rows << "x" << cols << " payload (" << expected
        << " bytes total) but file has " << bytes.size() << " bytes";
    throw Error(ErrorCode::MalformedFile, msg.str());
  }
  file.values.resize(rows, cols);
  float* dst = file.values.data();
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) {
    dst[i] = detail::load_le<float>(bytes.data() + kFeatureHeaderBytes + i * 4);
  }
  return file;
}

}  // namespace lidarfeat
