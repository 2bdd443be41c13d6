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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sbsr/core/tensor.hpp"

namespace sbsr {

// 8-bit RGB raster, interleaved, row-major. Alpha is composited onto white at
// decode time so every downstream consumer sees an opaque image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 255);

  bool empty() const { return width == 0 || height == 0; }
  std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  void Set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  friend bool operator==(const Image&, const Image&) = default;
};

Image ReadPng(const std::filesystem::path& path);
void WritePng(const std::filesystem::path& path, const Image& image);
std::string EncodePng(const Image& image);
Image DecodePng(std::string_view bytes);

// Area-weighted resampling (box filter with fractional coverage). Works for
// both up- and down-scaling and is deterministic.
Image Resize(const Image& image, int width, int height);

// Pinned boundary contract shared by training, evaluation and the service:
// opaque RGB on white, resized to (resolution x resolution).
Image PrepareInput(const Image& image, int resolution);

// (height*width x 3) matrix with channel values in [0, 1].
Matrix ToUnitMatrix(const Image& image);

// Copies `tile` into `canvas` with its top-left corner at (x0, y0); clipped.
void Blit(Image& canvas, const Image& tile, int x0, int y0);

}  // namespace sbsr
