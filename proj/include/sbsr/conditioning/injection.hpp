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
#include <vector>

#include "sbsr/conditioning/bundle.hpp"
#include "sbsr/conditioning/config.hpp"
#include "sbsr/diffusion/backbone.hpp"

namespace sbsr::conditioning {

struct InjectionParams {
  ag::Var image_proj;                      // (cls_dim x t_tokens*context_width)
  std::vector<ImageAttentionKV> image_kv;  // per attention site, zero-initialized
  std::array<ag::Var, 3> local_kernels;    // (patch_width x block channels), zero-initialized
};

struct InjectionShape {
  int attention_sites = diffusion::kHookCount;
  int cls_dim = 0;
  int patch_width = 0;
};

InjectionParams MakeInjectionParams(const ConditioningConfig& config, const diffusion::BackboneDims& dims,
                                    const InjectionShape& shape, std::uint64_t seed);

// cls (1 x cls_dim) -> (t_tokens x width) tokens, consecutive chunks of the projection.
ag::Var ProjectGlobal(const RowVector& cls_token, const ag::Var& image_proj, int t_tokens);

// resize(patch_tokens * kernel) onto a (height x width) grid.
ag::Var LocalResidual(const Matrix& patch_tokens, int grid, const ag::Var& kernel, int height, int width);

// f + LocalResidual(...), same shape as f. ShapeMismatch if the kernel width
// differs from f's channels.
diffusion::SpatialMap InjectLocal(const diffusion::SpatialMap& f, const Matrix& patch_tokens, int grid,
                                  const ag::Var& kernel);

}  // namespace sbsr::conditioning
