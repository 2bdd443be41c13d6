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
#include <vector>

#include "sbsr/autograd/autograd.hpp"

namespace sbsr::conditioning {

// Trainable key/value projections of the decoupled image cross-attention at one site.
struct ImageAttentionKV {
  ag::Var key;    // (context_width x attention_width)
  ag::Var value;  // (context_width x attention_width)
};

// Everything the denoiser consumes besides the noisy latent and timestep.
// Undefined members mean the corresponding pathway is switched off.
struct ConditioningBundle {
  ag::Var context;       // (text_tokens x context_width) for text cross-attention
  ag::Var pooled;        // (1 x pooled_width), routed into the time embedding
  ag::Var image_tokens;  // (T x context_width) global visual tokens
  std::vector<ImageAttentionKV> image_kv;  // one per attention site, used with image_tokens
  double ip_scale = 1.0;
  std::array<ag::Var, 3> local_maps;  // residuals added to the three down-block outputs
};

}  // namespace sbsr::conditioning
