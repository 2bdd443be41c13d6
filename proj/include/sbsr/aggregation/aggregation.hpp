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
#include <span>
#include <vector>

#include "sbsr/autograd/autograd.hpp"
#include "sbsr/diffusion/features.hpp"

namespace sbsr::aggregation {

inline constexpr int kDefaultEmbeddingDim = 1280;
inline constexpr int kRefineBlocks = 3;
inline constexpr int kMaxNormGroups = 32;

// norm -> silu -> 1x1 conv, twice, plus the skip. The second conv starts at
// zero so a fresh block is the identity.
struct ResidualBlock {
  ag::Var norm1_gamma, norm1_beta, conv1_w, conv1_b;
  ag::Var norm2_gamma, norm2_beta, conv2_w, conv2_b;
};

struct ScaleAdapter {
  ag::Var proj_w;  // (C_k x D)
  ag::Var proj_b;  // (1 x D)
  std::array<ResidualBlock, kRefineBlocks> refine;
};

struct AggregationParams {
  std::array<ScaleAdapter, diffusion::kHookCount> adapters;
  ag::Var alpha;  // (1 x 6) fusion logits

  std::vector<ag::Var> Trainable() const;
};

AggregationParams MakeAggregationParams(const std::array<int, diffusion::kHookCount>& channels, int dim,
                                        std::uint64_t seed);
ResidualBlock MakeResidualBlock(int dim, std::uint64_t seed);

int NormGroups(int dim);

// Project, refine, global max pool: (positions x C_k) -> (1 x D). ShapeMismatch on a channel mismatch.
ag::Var AdaptScale(const ag::Var& map, const ScaleAdapter& adapter);

RowVector FusionWeights(const RowVector& alpha);

// Softmax(alpha)-weighted sum of six (1 x D) vectors, before normalization. CountMismatch unless six.
ag::Var FuseScalesRaw(std::span<const ag::Var> scales, const ag::Var& alpha);
ag::Var FuseScales(std::span<const ag::Var> scales, const ag::Var& alpha);

// Pre-normalization fused vector for one image.
ag::Var EmbedFeaturesRaw(const diffusion::MultiScaleFeatures& features, const AggregationParams& params);

// Elementwise max over pre-normalization view vectors, then unit norm. EmptyViewSet on no views.
ag::Var PoolViews(std::span<const ag::Var> views);

}  // namespace sbsr::aggregation
