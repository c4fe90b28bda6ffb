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

#include <cmath>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

#include "lidarfeat/error.hpp"
#include "lidarfeat/pc_io.hpp"

namespace lidarfeat {

namespace {

// Rec. 601 luma.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::lround(std::min(y, 255.0)));
}

void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') {
    throw Error(ErrorCode::MalformedFile, path.string() + ": not a binary PGM (P5) at byte offset 0");
  }
  int width = 0, height = 0, maxval = 0;
  skip_pnm_space(in);
  in >> width;
  skip_pnm_space(in);
  in >> height;
  skip_pnm_space(in);
  in >> maxval;
  in.get();  // single whitespace before raster
  if (!in || width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": unsupported PGM header (8-bit only)");
  }
  GrayImage image(height, width);
  in.read(reinterpret_cast<char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.size())) {
    std::ostringstream msg;
    msg << path.string() << ": raster truncated after " << in.gcount() << " of " << image.size() << " bytes";
    throw Error(ErrorCode::MalformedFile, msg.str());
  }
  if (maxval != 255) {
    for (Index i = 0; i < image.size(); ++i) {
      image.data()[i] = static_cast<std::uint8_t>(std::lround(image.data()[i] * 255.0 / maxval));
    }
  }
  return image;
}

GrayImage read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> raster(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raster.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::MalformedFile, path.string() + ": " + message);
  }
  GrayImage image(png.height, png.width);
  for (png_uint_32 r = 0; r < png.height; ++r) {
    for (png_uint_32 c = 0; c < png.width; ++c) {
      const png_byte* px = raster.data() + (static_cast<std::size_t>(r) * png.width + c) * 3;
      image(r, c) = luma(px[0], px[1], px[2]);
    }
  }
  return image;
}

}  // namespace

GrayImage read_gray_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::FileNotFound, path.string());
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw Error(ErrorCode::MalformedFile, path.string() + ": unsupported image extension");
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace lidarfeat
