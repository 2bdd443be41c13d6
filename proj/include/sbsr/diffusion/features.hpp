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
#include <string_view>

#include "sbsr/conditioning/bundle.hpp"
#include "sbsr/core/image.hpp"
#include "sbsr/diffusion/backbone.hpp"

namespace sbsr::diffusion {

inline constexpr int kDefaultTimestep = 220;

// Hooked maps in order down1, down2, down3, up1, up2, up3.
struct MultiScaleFeatures {
  std::array<SpatialMap, kHookCount> maps;
};

// Fixed per-item noise seed used outside training.
std::uint64_t EpsilonSeedForItem(std::string_view item_id);

// Encodes, noises to step t with eps from `epsilon_seed`, and runs one
// conditioned denoiser pass. Local maps are added to the down-block outputs
// inside the hooks; the noise estimate is dropped.
MultiScaleFeatures ExtractFeatures(const Image& image, const conditioning::ConditioningBundle& cond, int t,
                                   std::uint64_t epsilon_seed, const Backbone& backbone);
MultiScaleFeatures ExtractFeaturesFromLatent(const LatentMap& z0, const conditioning::ConditioningBundle& cond, int t,
                                             std::uint64_t epsilon_seed, const Backbone& backbone);

// HookMismatch unless the six maps carry the expected channels and strides
// for a latent of (latent_height x latent_width); NonFiniteFeatures on NaN/Inf.
void CheckFeatureContract(const MultiScaleFeatures& features, const BackboneDims& dims, int latent_height,
                          int latent_width);

}  // namespace sbsr::diffusion
