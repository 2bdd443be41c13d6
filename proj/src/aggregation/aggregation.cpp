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

#include "sbsr/aggregation/aggregation.hpp"

#include <fmt/core.h>

#include <cmath>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::aggregation {

using ag::Var;

namespace {

Var Kaiming(Index rows, Index cols, std::uint64_t seed) {
  return Var::Parameter(GaussianMatrix(rows, cols, seed, std::sqrt(1.0 / static_cast<double>(rows))));
}

Var Filled(Index cols, double v) { return Var::Parameter(Matrix::Constant(1, cols, v)); }

Var Refine(const Var& x, const ResidualBlock& b, int groups) {
  Var h = ag::Silu(ag::GroupNorm(x, groups, b.norm1_gamma, b.norm1_beta));
  h = ag::AddRowBroadcast(ag::MatMul(h, b.conv1_w), b.conv1_b);
  h = ag::Silu(ag::GroupNorm(h, groups, b.norm2_gamma, b.norm2_beta));
  h = ag::AddRowBroadcast(ag::MatMul(h, b.conv2_w), b.conv2_b);
  return ag::Add(x, h);
}

}  // namespace

std::vector<Var> AggregationParams::Trainable() const {
  std::vector<Var> out;
  for (const auto& a : adapters) {
    out.push_back(a.proj_w);
    out.push_back(a.proj_b);
    for (const auto& b : a.refine) {
      for (const Var& v : {b.norm1_gamma, b.norm1_beta, b.conv1_w, b.conv1_b, b.norm2_gamma, b.norm2_beta, b.conv2_w,
                           b.conv2_b}) {
        out.push_back(v);
      }
    }
  }
  out.push_back(alpha);
  return out;
}

int NormGroups(int dim) {
  int g = std::min(kMaxNormGroups, dim);
  while (dim % g != 0) --g;
  return g;
}

ResidualBlock MakeResidualBlock(int dim, std::uint64_t seed) {
  ResidualBlock b;
  b.norm1_gamma = Filled(dim, 1.0);
  b.norm1_beta = Filled(dim, 0.0);
  b.conv1_w = Kaiming(dim, dim, seed);
  b.conv1_b = Filled(dim, 0.0);
  b.norm2_gamma = Filled(dim, 1.0);
  b.norm2_beta = Filled(dim, 0.0);
  b.conv2_w = Var::Parameter(Matrix::Zero(dim, dim));
  b.conv2_b = Filled(dim, 0.0);
  return b;
}

AggregationParams MakeAggregationParams(const std::array<int, diffusion::kHookCount>& channels, int dim,
                                        std::uint64_t seed) {
  if (dim <= 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
  AggregationParams p;
  for (int k = 0; k < diffusion::kHookCount; ++k) {
    auto& a = p.adapters[static_cast<std::size_t>(k)];
    const std::uint64_t s = HashCombine(seed, Fnv1a64(fmt::format("adapter{}", k)));
    a.proj_w = Kaiming(channels[static_cast<std::size_t>(k)], dim, s);
    a.proj_b = Filled(dim, 0.0);
    for (int r = 0; r < kRefineBlocks; ++r) {
      a.refine[static_cast<std::size_t>(r)] = MakeResidualBlock(dim, HashCombine(s, static_cast<std::uint64_t>(r + 1)));
    }
  }
  p.alpha = Var::Parameter(Matrix::Zero(1, diffusion::kHookCount));
  return p;
}

Var AdaptScale(const Var& map, const ScaleAdapter& adapter) {
  if (map.cols() != adapter.proj_w.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("map has {} channels, adapter expects {}", map.cols(), adapter.proj_w.rows()));
  }
  Var x = ag::AddRowBroadcast(ag::MatMul(map, adapter.proj_w), adapter.proj_b);
  const int groups = NormGroups(static_cast<int>(x.cols()));
  for (const auto& b : adapter.refine) x = Refine(x, b, groups);
  return ag::MaxRows(x);
}

RowVector FusionWeights(const RowVector& alpha) {
  const RowVector e = (alpha.array() - alpha.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Var FuseScalesRaw(std::span<const Var> scales, const Var& alpha) {
  if (scales.size() != static_cast<std::size_t>(diffusion::kHookCount)) {
    throw Error(ErrorCode::kCountMismatch, fmt::format("fusion needs {} scales, got {}", diffusion::kHookCount,
                                                       scales.size()));
  }
  // (1 x 6) weights times the (6 x D) stack.
  return ag::MatMul(ag::SoftmaxRows(alpha), ag::ConcatRows(scales));
}

Var FuseScales(std::span<const Var> scales, const Var& alpha) {
  return ag::L2NormalizeRows(FuseScalesRaw(scales, alpha));
}

Var EmbedFeaturesRaw(const diffusion::MultiScaleFeatures& features, const AggregationParams& params) {
  std::array<Var, diffusion::kHookCount> scales;
  for (std::size_t k = 0; k < scales.size(); ++k) scales[k] = AdaptScale(features.maps[k].data, params.adapters[k]);
  return FuseScalesRaw(scales, params.alpha);
}

Var PoolViews(std::span<const Var> views) {
  if (views.empty()) throw Error(ErrorCode::kEmptyViewSet, "no view embeddings to pool");
  return ag::L2NormalizeRows(ag::MaxRows(ag::ConcatRows(views)));
}

}  // namespace sbsr::aggregation
