// Copyright 2026 The sbsr Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include "sbsr/core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sbsr/core/error.hpp"

namespace sbsr {

namespace {

Image FinishRead(png_image& png) {
  png.format = PNG_FORMAT_RGB;
  Image image;
  image.width = static_cast<int>(png.width);
  image.height = static_cast<int>(png.height);
  image.pixels.resize(PNG_IMAGE_SIZE(png));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&png, &background, image.pixels.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kParseError, "png decode failed: " + message);
  }
  return image;
}

png_image WriteHeader(const Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  return png;
}

struct Tap {
  int index;
  double weight;
};

// For each output coordinate, the source pixels it overlaps and their coverage weights.
std::vector<std::vector<Tap>> AreaTaps(int in, int out) {
  std::vector<std::vector<Tap>> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
    double total = 0.0;
    for (int i = first; i <= last; ++i) {
      const double w = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
      if (w > 0.0) {
        taps[o].push_back({i, w});
        total += w;
      }
    }
    for (Tap& t : taps[o]) t.weight /= total;
  }
  return taps;
}

}  // namespace

Image::Image(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

void Image::Set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  std::uint8_t* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

Image ReadPng(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return DecodePng(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Image DecodePng(std::string_view bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kParseError, "not a decodable png: " + message);
  }
  return FinishRead(png);
}

std::string EncodePng(const Image& image) {
  png_image png = WriteHeader(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png size query failed: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void WritePng(const std::filesystem::path& path, const Image& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string bytes = EncodePng(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image Resize(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "resize to empty image");
  if (image.width == width && image.height == height) return image;
  const auto xt = AreaTaps(image.width, width);
  const auto yt = AreaTaps(image.height, height);
  // Horizontal pass into doubles, then vertical pass with a single rounding.
  std::vector<double> tmp(static_cast<std::size_t>(image.height) * width * 3, 0.0);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (const Tap& t : xt[x]) acc += t.weight * image.at(t.index, y, c);
        tmp[(static_cast<std::size_t>(y) * width + x) * 3 + c] = acc;
      }
    }
  }
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (const Tap& t : yt[y]) acc += t.weight * tmp[(static_cast<std::size_t>(t.index) * width + x) * 3 + c];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
    }
  }
  return out;
}

Image PrepareInput(const Image& image, int resolution) {
  if (image.empty()) throw Error(ErrorCode::kBadImageSize, "empty image");
  return Resize(image, resolution, resolution);
}

Matrix ToUnitMatrix(const Image& image) {
  Matrix m(static_cast<Index>(image.width) * image.height, 3);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = image.pixels[static_cast<std::size_t>(i)] / 255.0;
  return m;
}

void Blit(Image& canvas, const Image& tile, int x0, int y0) {
  for (int y = 0; y < tile.height; ++y) {
    const int cy = y0 + y;
    if (cy < 0 || cy >= canvas.height) continue;
    for (int x = 0; x < tile.width; ++x) {
      const int cx = x0 + x;
      if (cx < 0 || cx >= canvas.width) continue;
      for (int c = 0; c < 3; ++c) canvas.at(cx, cy, c) = tile.at(x, y, c);
    }
  }
}

}  // namespace sbsr
