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

#include <memory>
#include <string_view>

#include "sbsr/core/image.hpp"
#include "sbsr/core/tensor.hpp"

namespace sbsr::vl {

// Global class token plus the square grid of penultimate-layer patch tokens.
struct VisualTokens {
  RowVector cls_token;
  Matrix patch_tokens;  // (grid*grid x patch_width), row-major over the grid
  int grid = 0;
};

// Frozen vision-language encoder handle: a joint image/text embedding space
// for view scoring, and visual tokens for conditioning the denoiser.
class VisionLanguageEncoder {
 public:
  virtual ~VisionLanguageEncoder() = default;

  virtual int embedding_dim() const = 0;
  virtual int cls_dim() const = 0;
  virtual int patch_width() const = 0;
  virtual int patch_grid() const = 0;

  // Unit-norm joint-space embeddings.
  virtual RowVector EmbedImage(const Image& image) const = 0;
  virtual RowVector EmbedText(std::string_view text) const = 0;

  virtual VisualTokens EncodeVisualTokens(const Image& image) const = 0;
};

struct VisionEncoderDims {
  int embedding_dim = 1024;
  int thumbnail = 16;  // joint-space image embedding flattens a thumbnail of this size
  int input_size = 224;
  int patch_size = 14;
  int patch_width = 1280;
  int cls_dim = 1024;
};

// Deterministic stand-in:
//  image  -> area-resize to thumbnail, flatten RGB in [0,1], project by a
//            N(0,1) matrix drawn from mt19937_64(7), normalize;
//  text   -> N(0,1) vector drawn from mt19937_64(FNV-1a(text)), normalize;
//  tokens -> per-patch tanh projection of centered pixels; cls is a
//            projection of the mean patch token.
class MockVisionLanguageEncoder final : public VisionLanguageEncoder {
 public:
  static constexpr std::uint64_t kImageProjectionSeed = 7;

  explicit MockVisionLanguageEncoder(VisionEncoderDims dims = {});

  int embedding_dim() const override { return dims_.embedding_dim; }
  int cls_dim() const override { return dims_.cls_dim; }
  int patch_width() const override { return dims_.patch_width; }
  int patch_grid() const override { return dims_.input_size / dims_.patch_size; }

  RowVector EmbedImage(const Image& image) const override;
  RowVector EmbedText(std::string_view text) const override;
  VisualTokens EncodeVisualTokens(const Image& image) const override;

  const VisionEncoderDims& dims() const { return dims_; }

 private:
  VisionEncoderDims dims_;
  Matrix image_projection_;
  Matrix patch_projection_;
  Matrix cls_projection_;
};

// "mock" yields the stand-in; anything else is EncoderUnavailable in this build.
std::unique_ptr<VisionLanguageEncoder> MakeVisionLanguageEncoder(std::string_view id, const VisionEncoderDims& dims);

}  // namespace sbsr::vl
