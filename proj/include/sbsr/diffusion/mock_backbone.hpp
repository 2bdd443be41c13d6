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

#include <string>
#include <vector>

#include "sbsr/diffusion/backbone.hpp"

namespace sbsr::diffusion {

// Asset-free stand-in with the real backbone's contract. Weights are drawn
// once from fixed seeds and never change.
//   encoder: 8x8 average pool of pixels in [-1, 1], then a fixed 3 -> d lift;
//   text:    causal context rows: row i is the sum of N(0,1) token rows 0..i
//            (each seeded by FNV-1a of the token) over sqrt(i + 1); padding
//            repeats the end-of-text row;
//   denoiser: three down blocks (pool, 1x1 conv, time bias, silu, cross-attention)
//            and three up blocks with nearest upsampling and skip connections.
class MockBackbone final : public Backbone {
 public:
  static constexpr std::uint64_t kWeightSeed = 0x5b5b'd1ffULL;
  static constexpr const char* kStartToken = "<|startoftext|>";
  static constexpr const char* kEndToken = "<|endoftext|>";

  explicit MockBackbone(BackboneDims dims = {});

  const BackboneDims& dims() const override { return dims_; }
  const NoiseSchedule& schedule() const override { return schedule_; }
  int hook_points() const override { return kHookCount; }
  int attention_sites() const override { return kHookCount; }

  LatentMap EncodeLatent(const Image& image) const override;
  Matrix EncodeText(std::string_view text) const override;
  ag::Var Denoise(const LatentMap& z_t, int t, const conditioning::ConditioningBundle& cond,
                  const BlockHook& hook) const override;
  std::uint64_t WeightChecksum() const override;

  const Matrix& latent_lift() const { return latent_lift_; }

  // Lowercased alphanumeric words wrapped in start/end tokens, at most text_tokens long.
  std::vector<std::string> Tokenize(std::string_view text) const;

 private:
  struct AttentionSite {
    ag::Var wq, wk, wv, wo;
  };

  ag::Var Weight(const std::string& name, Index rows, Index cols);
  ag::Var Attend(int site, const ag::Var& x, const conditioning::ConditioningBundle& cond) const;
  ag::Var TimeEmbedding(int t, const conditioning::ConditioningBundle& cond) const;

  BackboneDims dims_;
  NoiseSchedule schedule_;
  Matrix latent_lift_;
  std::vector<ag::Var> weights_;  // every frozen weight, in creation order
  ag::Var w_in_, w_12_, w_23_, w_mid_, w_up2_, w_skip2_, w_up3_, w_skip3_, w_out_;
  ag::Var w_time_, w_pooled_;
  std::array<ag::Var, kHookCount> time_bias_;
  std::array<AttentionSite, kHookCount> sites_;
};

}  // namespace sbsr::diffusion
