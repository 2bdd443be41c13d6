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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>

#include "sbsr/autograd/autograd.hpp"
#include "sbsr/conditioning/bundle.hpp"
#include "sbsr/core/image.hpp"
#include "sbsr/diffusion/schedule.hpp"

namespace sbsr::diffusion {

inline constexpr int kHookCount = 6;
inline constexpr int kDownBlocks = 3;
inline constexpr int kLatentStride = 8;

struct BackboneDims {
  int latent_channels = 4;
  std::array<int, 3> block_channels{320, 640, 1280};
  int text_tokens = 77;
  int text_width_l = 768;
  int text_width_g = 1280;
  int time_embed_dim = 1280;
  int attention_width = 64;

  int context_width() const { return text_width_l + text_width_g; }
  int pooled_width() const { return text_width_g; }
  // Hooks run down1, down2, down3, up1, up2, up3.
  int hook_channels(int hook) const;
  // Input pixels per feature cell: 8, 16, 32, 32, 16, 8.
  int hook_stride(int hook) const;
  void Validate() const;

  // Scaled-down widths for single-core smoke runs; same topology.
  static BackboneDims Desk();
};

struct LatentMap {
  int height = 0;
  int width = 0;
  Matrix values;  // (height*width x latent_channels)
};

struct SpatialMap {
  int height = 0;
  int width = 0;
  ag::Var data;  // (height*width x channels)

  int channels() const { return data.defined() ? static_cast<int>(data.cols()) : 0; }
};

// Receives each hookable block output and returns the map that continues
// downstream, so injections made here propagate through the rest of the pass.
using BlockHook = std::function<ag::Var(int hook, const SpatialMap& map)>;

class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual const BackboneDims& dims() const = 0;
  virtual const NoiseSchedule& schedule() const = 0;
  virtual bool frozen() const { return true; }
  virtual int hook_points() const = 0;
  virtual int attention_sites() const = 0;

  // Distribution mean of the latent encoder. BadImageSize unless both sides divide by 8.
  virtual LatentMap EncodeLatent(const Image& image) const = 0;
  // First text encoder: (text_tokens x text_width_l), padded or truncated.
  virtual Matrix EncodeText(std::string_view text) const = 0;
  // One denoiser pass; returns the noise estimate.
  virtual ag::Var Denoise(const LatentMap& z_t, int t, const conditioning::ConditioningBundle& cond,
                          const BlockHook& hook) const = 0;

  virtual std::uint64_t WeightChecksum() const = 0;
};

// "mock" yields the deterministic stand-in; anything else is BackboneUnavailable in this build.
std::unique_ptr<Backbone> MakeBackbone(std::string_view id, const BackboneDims& dims);

}  // namespace sbsr::diffusion
