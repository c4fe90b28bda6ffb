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

#include <cstring>
#include <functional>
#include <numbers>

#include "lidarfeat/error.hpp"
#include "lidarfeat/pc_io.hpp"
#include "test_support.hpp"

using namespace lidarfeat;
namespace lt = lidarfeat::testing;
using lidarfeat::testing::TempDir;

namespace {

std::vector<unsigned char> le_floats(std::initializer_list<float> values) {
  std::vector<unsigned char> out;
  for (float v : values) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, 4);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
  }
  return out;
}

std::vector<unsigned char> le_u32(std::initializer_list<std::uint32_t> values) {
  std::vector<unsigned char> out;
  for (std::uint32_t v : values) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lidarfeat::Error thrown";
  return ErrorCode::IoFailure;
}

}  // namespace

TEST(ReadPointCloud, SingleRecord) {
  TempDir dir;
  lt::write_bytes(dir / "a.bin", le_floats({1.0f, 2.0f, 3.0f, 0.5f}));
  const PointCloud c = read_point_cloud(dir / "a.bin");
  ASSERT_EQ(c.size(), 1);
  EXPECT_EQ(c.points(0, 0), 1.0f);
  EXPECT_EQ(c.points(0, 1), 2.0f);
  EXPECT_EQ(c.points(0, 2), 3.0f);
  EXPECT_EQ(c.points(0, 3), 0.5f);
}

TEST(ReadPointCloud, EmptyFileGivesEmptyCloud) {
  TempDir dir;
  lt::write_bytes(dir / "e.bin", {});
  EXPECT_TRUE(read_point_cloud(dir / "e.bin").empty());
}

TEST(ReadPointCloud, RejectsSizeNotMultipleOf16) {
  TempDir dir;
  auto bytes = le_floats({1.0f, 2.0f, 3.0f, 0.5f});
  bytes.push_back(0);
  lt::write_bytes(dir / "bad.bin", bytes);
  EXPECT_EQ(code_of([&] { read_point_cloud(dir / "bad.bin"); }), ErrorCode::MalformedFile);
}

TEST(ReadPointCloud, RejectsNonFiniteWithOffset) {
  TempDir dir;
  lt::write_bytes(dir / "nan.bin", le_floats({1.0f, 2.0f, 3.0f, 0.5f, 1.0f, NAN, 3.0f, 0.5f}));
  try {
    read_point_cloud(dir / "nan.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("20"), std::string::npos) << e.what();
  }
}

TEST(ReadPointCloud, MissingFile) {
  EXPECT_EQ(code_of([] { read_point_cloud("/nonexistent/cloud.bin"); }), ErrorCode::FileNotFound);
}

TEST(ReadPointCloud, PreservesOrderAndCount) {
  TempDir dir;
  std::mt19937_64 rng(3);
  const Points3d xyz = lt::random_points(rng, 257, 20.0);
  const Eigen::VectorXd intensity = lt::random_values(rng, 257, 0.0, 1.0);
  lt::write_cloud(dir / "r.bin", lt::cloud_rows(xyz, intensity));
  const PointCloud c = read_point_cloud(dir / "r.bin");
  EXPECT_EQ(static_cast<std::uintmax_t>(c.size()), fs::file_size(dir / "r.bin") / 16);
  EXPECT_TRUE(c.points == lt::cloud_rows(xyz, intensity));
}

TEST(ReadLabels, SplitsSemanticAndInstance) {
  TempDir dir;
  lt::write_bytes(dir / "l.label", le_u32({0x00020001u}));
  const LabelArray l = read_labels(dir / "l.label", 1);
  EXPECT_EQ(l.semantic[0], 1);
  EXPECT_EQ(l.instance[0], 2);
}

TEST(ReadLabels, EmptyAndMismatch) {
  TempDir dir;
  lt::write_bytes(dir / "e.label", {});
  EXPECT_EQ(read_labels(dir / "e.label", 0).size(), 0u);
  lt::write_bytes(dir / "two.label", le_u32({1, 2}));
  EXPECT_EQ(code_of([&] { read_labels(dir / "two.label", 3); }), ErrorCode::LengthMismatch);
  lt::write_bytes(dir / "odd.label", {1, 2, 3});
  EXPECT_EQ(code_of([&] { read_labels(dir / "odd.label", 0); }), ErrorCode::MalformedFile);
}

TEST(ReadLabels, RoundTrip) {
  TempDir dir;
  LabelArray l;
  l.semantic = {10, 40, 252};
  l.instance = {0, 7, 65535};
  write_labels(dir / "rt.label", l);
  const LabelArray back = read_labels(dir / "rt.label", 3);
  EXPECT_EQ(back.semantic, l.semantic);
  EXPECT_EQ(back.instance, l.instance);
}

TEST(ScanSequence, FlatDirectorySortedWithGaps) {
  TempDir dir;
  lt::write_bytes(dir / "000005.bin", {});
  lt::write_bytes(dir / "000000.bin", {});
  lt::write_bytes(dir / "notes.bin", {});
  const FrameCatalog c = scan_sequence(dir.path());
  ASSERT_EQ(c.frames.size(), 2u);
  EXPECT_EQ(c.frames[0].frame_index, 0);
  EXPECT_EQ(c.frames[1].frame_index, 5);
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(ScanSequence, KittiLayoutPairsImagesAndLabels) {
  TempDir dir;
  fs::create_directories(dir / "velodyne");
  fs::create_directories(dir / "labels");
  fs::create_directories(dir / "image_2");
  lt::write_bytes(dir.path() / "velodyne" / "000000.bin", {});
  lt::write_bytes(dir.path() / "velodyne" / "000001.bin", {});
  lt::write_bytes(dir.path() / "labels" / "000001.label", {});
  lt::write_bytes(dir.path() / "image_2" / "000000.png", {});
  const FrameCatalog c = scan_sequence(dir.path());
  ASSERT_EQ(c.frames.size(), 2u);
  EXPECT_TRUE(c.frames[0].image_path.has_value());
  EXPECT_FALSE(c.frames[0].label_path.has_value());
  EXPECT_FALSE(c.frames[1].image_path.has_value());
  EXPECT_TRUE(c.frames[1].label_path.has_value());
}

TEST(ScanSequence, EmptyDirectory) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { scan_sequence(dir.path()); }), ErrorCode::EmptySequence);
}

TEST(RangeImage, ForwardPointLandsInCentreColumn) {
  PointCloud c;
  c.points.resize(1, 4);
  c.points << 10.0f, 0.0f, 0.0f, 0.0f;
  const RangeImage img = project_range_image(c, {64, 2048, 3.0, -25.0});
  ASSERT_EQ(img.width(), 2048);
  EXPECT_FLOAT_EQ(img.pixels.col(1024).maxCoeff(), 10.0f);
  EXPECT_EQ((img.pixels.array() > 0).count(), 1);
}

TEST(RangeImage, EmptyCloudIsBlank) {
  const RangeImage img = project_range_image(PointCloud{});
  EXPECT_EQ(img.pixels.maxCoeff(), 0.0f);
}

TEST(RangeImage, NearestReturnWins) {
  PointCloud c;
  c.points.resize(2, 4);
  c.points << 9.0f, 0.0f, 0.0f, 0.0f, 5.0f, 0.0f, 0.0f, 0.0f;
  const RangeImage img = project_range_image(c);
  EXPECT_EQ(img.pixels.maxCoeff(), 5.0f);
}

TEST(RangeImage, PixelsAreMinimumOfReprojectedPoints) {
  std::mt19937_64 rng(11);
  const RapidCloud scan = lt::random_scan(rng, 3000);
  PointCloud c;
  c.points = lt::cloud_rows(scan.xyz, Eigen::VectorXd::Zero(3000));
  const RangeProjectionParams params{16, 64, 3.0, -25.0};
  const RangeImage img = project_range_image(c, params);

  Eigen::MatrixXf expected = Eigen::MatrixXf::Zero(16, 64);
  for (Index i = 0; i < c.size(); ++i) {
    const double x = c.points(i, 0), y = c.points(i, 1), z = c.points(i, 2);
    const double r = std::sqrt(x * x + y * y + z * z);
    const double el = std::asin(z / r);
    const double fd = deg_to_rad(-25.0), fov = deg_to_rad(28.0);
    const Index u = std::clamp<Index>(static_cast<Index>(std::floor(0.5 * (1.0 - std::atan2(y, x) / std::numbers::pi) * 64)), 0, 63);
    const Index v = std::clamp<Index>(static_cast<Index>(std::floor((1.0 - (el - fd) / fov) * 16)), 0, 15);
    float& px = expected(v, u);
    if (px == 0.0f || static_cast<float>(r) < px) px = static_cast<float>(r);
  }
  EXPECT_TRUE(img.pixels == expected);
}

TEST(FeatureFile, RoundTripIsBitIdentical) {
  TempDir dir;
  FeatureMatrix m(3, 4);
  m << 0.0f, 1.0f, -2.5f, 1e-30f, 3.25f, 7.0f, 0.125f, 9.0f, 1e20f, -0.0f, 2.0f, 5.0f;
  write_features(dir / "f.rapd", m, 4);
  const FeatureFile f = read_features(dir / "f.rapd");
  EXPECT_EQ(f.version, kFeatureVersion);
  EXPECT_EQ(f.k, 4u);
  ASSERT_EQ(f.values.rows(), 3);
  ASSERT_EQ(f.values.cols(), 4);
  EXPECT_EQ(std::memcmp(f.values.data(), m.data(), sizeof(float) * 12), 0);

  write_features(dir / "g.rapd", f.values, f.k);
  EXPECT_EQ(lt::read_bytes(dir / "f.rapd"), lt::read_bytes(dir / "g.rapd"));
  EXPECT_EQ(fs::file_size(dir / "f.rapd"), kFeatureHeaderBytes + 12 * 4);
}

TEST(FeatureFile, HeaderLayout) {
  TempDir dir;
  FeatureMatrix m = FeatureMatrix::Constant(2, 3, 1.0f);
  write_features(dir / "h.rapd", m, 7);
  const auto bytes = lt::read_bytes(dir / "h.rapd");
  ASSERT_GE(bytes.size(), kFeatureHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RAPD");
  EXPECT_EQ(bytes[4] | (bytes[5] << 8), 1);
  EXPECT_EQ(bytes[6], 2);   // point_count
  EXPECT_EQ(bytes[10], 7);  // k
  EXPECT_EQ(bytes[14], 3);  // feature_width
}

TEST(FeatureFile, RejectsBadMagicAndTruncation) {
  TempDir dir;
  write_features(dir / "ok.rapd", FeatureMatrix::Zero(2, 2), 2);
  auto bytes = lt::read_bytes(dir / "ok.rapd");

  auto bad_magic = bytes;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  lt::write_bytes(dir / "magic.rapd", bad_magic);
  EXPECT_EQ(code_of([&] { read_features(dir / "magic.rapd"); }), ErrorCode::MalformedFile);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 4);
  lt::write_bytes(dir / "short.rapd", truncated);
  EXPECT_EQ(code_of([&] { read_features(dir / "short.rapd"); }), ErrorCode::MalformedFile);

  auto bad_version = bytes;
  bad_version[4] = 9;
  lt::write_bytes(dir / "ver.rapd", bad_version);
  EXPECT_EQ(code_of([&] { read_features(dir / "ver.rapd"); }), ErrorCode::MalformedFile);
}

TEST(GrayImage, PgmRoundTrip) {
  TempDir dir;
  GrayImage img(3, 5);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<std::uint8_t>(i * 17);
  write_pgm(dir / "a.pgm", img);
  EXPECT_TRUE(read_gray_image(dir / "a.pgm") == img);
}

TEST(GrayImage, RangeRenderingSaturates) {
  RangeImage r;
  r.pixels.resize(1, 3);
  r.pixels << 0.0f, 40.0f, 200.0f;
  const GrayImage g = range_image_to_gray(r, 80.0);
  EXPECT_EQ(g(0, 0), 0);
  EXPECT_EQ(g(0, 1), 128);
  EXPECT_EQ(g(0, 2), 255);
}
