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

#include "sbsr/diffusion/backbone.hpp"

#include <fmt/core.h>

#include "sbsr/core/error.hpp"
#include "sbsr/diffusion/mock_backbone.hpp"

namespace sbsr::diffusion {

namespace {

constexpr std::array<int, kHookCount> kHookBlock{0, 1, 2, 2, 1, 0};

void CheckHook(int hook) {
  if (hook < 0 || hook >= kHookCount) throw Error(ErrorCode::kInvalidArgument, fmt::format("hook {} out of range", hook));
}

}  // namespace

int BackboneDims::hook_channels(int hook) const {
  CheckHook(hook);
  return block_channels[static_cast<std::size_t>(kHookBlock[static_cast<std::size_t>(hook)])];
}

int BackboneDims::hook_stride(int hook) const {
  CheckHook(hook);
  return kLatentStride << kHookBlock[static_cast<std::size_t>(hook)];
}

void BackboneDims::Validate() const {
  if (latent_channels <= 0 || text_tokens <= 0 || text_width_l <= 0 || text_width_g <= 0 || time_embed_dim <= 0 ||
      attention_width <= 0 || time_embed_dim % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "backbone dims must be positive (time embedding even)");
  }
  for (int c : block_channels) {
    if (c <= 0) throw Error(ErrorCode::kInvalidArgument, "block channels must be positive");
  }
}

BackboneDims BackboneDims::Desk() {
  BackboneDims d;
  d.block_channels = {32, 64, 128};
  d.text_width_l = 64;
  d.text_width_g = 64;
  d.time_embed_dim = 64;
  d.attention_width = 32;
  return d;
}

std::unique_ptr<Backbone> MakeBackbone(std::string_view id, const BackboneDims& dims) {
  if (id == "mock") return std::make_unique<MockBackbone>(dims);
  throw Error(ErrorCode::kBackboneUnavailable,
              fmt::format("backbone '{}' is not bundled with this build; use the mock backbone", id));
}

}  // namespace sbsr::diffusion
