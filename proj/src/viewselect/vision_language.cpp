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

#include "sbsr/viewselect/vision_language.hpp"

#include <cmath>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::vl {

namespace {

RowVector Normalized(RowVector v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

}  // namespace

MockVisionLanguageEncoder::MockVisionLanguageEncoder(VisionEncoderDims dims) : dims_(dims) {
  if (dims_.input_size % dims_.patch_size != 0) {
    throw Error(ErrorCode::kInvalidArgument, "encoder input size must be a multiple of the patch size");
  }
  const Index flat = static_cast<Index>(dims_.thumbnail) * dims_.thumbnail * 3;
  image_projection_ = GaussianMatrix(flat, dims_.embedding_dim, kImageProjectionSeed, 1.0);
  const Index patch_flat = static_cast<Index>(dims_.patch_size) * dims_.patch_size * 3;
  patch_projection_ = GaussianMatrix(patch_flat, dims_.patch_width, 8, 4.0 / std::sqrt(static_cast<double>(patch_flat)));
  cls_projection_ =
      GaussianMatrix(dims_.patch_width, dims_.cls_dim, 9, 1.0 / std::sqrt(static_cast<double>(dims_.patch_width)));
}

RowVector MockVisionLanguageEncoder::EmbedImage(const Image& image) const {
  const Image thumb = Resize(image, dims_.thumbnail, dims_.thumbnail);
  const Matrix pixels = ToUnitMatrix(thumb);
  const Eigen::Map<const RowVector> flat(pixels.data(), pixels.size());
  return Normalized(flat * image_projection_);
}

RowVector MockVisionLanguageEncoder::EmbedText(std::string_view text) const {
  return Normalized(GaussianMatrix(1, dims_.embedding_dim, Fnv1a64(text), 1.0));
}

VisualTokens MockVisionLanguageEncoder::EncodeVisualTokens(const Image& image) const {
  const int grid = patch_grid();
  const int ps = dims_.patch_size;
  const Image input = Resize(image, dims_.input_size, dims_.input_size);
  Matrix patches(static_cast<Index>(grid) * grid, static_cast<Index>(ps) * ps * 3);
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      const Index row = static_cast<Index>(gy) * grid + gx;
      Index col = 0;
      for (int y = 0; y < ps; ++y) {
        for (int x = 0; x < ps; ++x) {
          for (int c = 0; c < 3; ++c) patches(row, col++) = input.at(gx * ps + x, gy * ps + y, c) / 255.0 - 0.5;
        }
      }
    }
  }
  VisualTokens tokens;
  tokens.grid = grid;
  tokens.patch_tokens = (patches * patch_projection_).array().tanh().matrix();
  tokens.cls_token = tokens.patch_tokens.colwise().mean() * cls_projection_;
  return tokens;
}

std::unique_ptr<VisionLanguageEncoder> MakeVisionLanguageEncoder(std::string_view id, const VisionEncoderDims& dims) {
  if (id == "mock") return std::make_unique<MockVisionLanguageEncoder>(dims);
  throw Error(ErrorCode::kEncoderUnavailable,
              std::string("vision-language encoder '") + std::string(id) + "' is not available in this build; use 'mock'");
}

}  // namespace sbsr::vl
