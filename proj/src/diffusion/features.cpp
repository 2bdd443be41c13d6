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

#include "sbsr/diffusion/features.hpp"

#include <fmt/core.h>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::diffusion {

std::uint64_t EpsilonSeedForItem(std::string_view item_id) { return Fnv1a64(item_id, Fnv1a64("epsilon")); }

MultiScaleFeatures ExtractFeatures(const Image& image, const conditioning::ConditioningBundle& cond, int t,
                                   std::uint64_t epsilon_seed, const Backbone& backbone) {
  return ExtractFeaturesFromLatent(backbone.EncodeLatent(image), cond, t, epsilon_seed, backbone);
}

MultiScaleFeatures ExtractFeaturesFromLatent(const LatentMap& z0, const conditioning::ConditioningBundle& cond, int t,
                                             std::uint64_t epsilon_seed, const Backbone& backbone) {
  if (backbone.hook_points() != kHookCount) {
    throw Error(ErrorCode::kHookMismatch, fmt::format("backbone exposes {} hook points, need {}",
                                                      backbone.hook_points(), kHookCount));
  }
  LatentMap zt{z0.height, z0.width, AddNoise(z0.values, t, epsilon_seed, backbone.schedule())};

  MultiScaleFeatures out;
  std::array<bool, kHookCount> seen{};
  auto hook = [&](int k, const SpatialMap& map) -> ag::Var {
    if (k < 0 || k >= kHookCount || seen[static_cast<std::size_t>(k)]) {
      throw Error(ErrorCode::kHookMismatch, fmt::format("unexpected hook call {}", k));
    }
    seen[static_cast<std::size_t>(k)] = true;
    ag::Var data = map.data;
    if (k < kDownBlocks) {
      const ag::Var& local = cond.local_maps[static_cast<std::size_t>(k)];
      if (local.defined()) {
        if (local.rows() != data.rows() || local.cols() != data.cols()) {
          throw Error(ErrorCode::kShapeMismatch,
                      fmt::format("local map {}x{} does not match block {} output {}x{}", local.rows(), local.cols(),
                                  k, data.rows(), data.cols()));
        }
        data = ag::Add(data, local);
      }
    }
    out.maps[static_cast<std::size_t>(k)] = SpatialMap{map.height, map.width, data};
    return data;
  };
  backbone.Denoise(zt, t, cond, hook);
  for (int k = 0; k < kHookCount; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) throw Error(ErrorCode::kHookMismatch, fmt::format("hook {} never fired", k));
  }
  CheckFeatureContract(out, backbone.dims(), z0.height, z0.width);
  return out;
}

void CheckFeatureContract(const MultiScaleFeatures& features, const BackboneDims& dims, int latent_height,
                          int latent_width) {
  for (int k = 0; k < kHookCount; ++k) {
    const auto& m = features.maps[static_cast<std::size_t>(k)];
    const int div = dims.hook_stride(k) / kLatentStride;
    if (!m.data.defined() || m.channels() != dims.hook_channels(k) || m.height != latent_height / div ||
        m.width != latent_width / div || m.data.rows() != static_cast<Index>(m.height) * m.width) {
      throw Error(ErrorCode::kHookMismatch,
                  fmt::format("hook {} map {}x{}x{} violates the channel/stride contract", k, m.height, m.width,
                              m.channels()));
    }
    if (!AllFinite(m.data.value())) throw Error(ErrorCode::kNonFiniteFeatures, fmt::format("hook {} map", k));
  }
}

}  // namespace sbsr::diffusion
