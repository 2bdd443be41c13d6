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

#include "sbsr/conditioning/injection.hpp"

#include <fmt/core.h>

#include <cmath>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/resample.hpp"

namespace sbsr::conditioning {

InjectionParams MakeInjectionParams(const ConditioningConfig& config, const diffusion::BackboneDims& dims,
                                    const InjectionShape& shape, std::uint64_t seed) {
  if (shape.cls_dim <= 0 || shape.patch_width <= 0 || shape.attention_sites <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "injection shape must be positive");
  }
  const Index width = dims.context_width();
  const Index a = dims.attention_width;
  InjectionParams p;
  // The projection starts random so the zero key/value paths receive gradient.
  p.image_proj = ag::Var::Parameter(GaussianMatrix(shape.cls_dim, config.t_tokens * width,
                                                   HashCombine(seed, Fnv1a64("image_proj")),
                                                   1.0 / std::sqrt(static_cast<double>(shape.cls_dim))));
  for (int s = 0; s < shape.attention_sites; ++s) {
    p.image_kv.push_back({ag::Var::Parameter(Matrix::Zero(width, a)), ag::Var::Parameter(Matrix::Zero(width, a))});
  }
  for (std::size_t k = 0; k < p.local_kernels.size(); ++k) {
    p.local_kernels[k] = ag::Var::Parameter(Matrix::Zero(shape.patch_width, dims.block_channels[k]));
  }
  return p;
}

ag::Var ProjectGlobal(const RowVector& cls_token, const ag::Var& image_proj, int t_tokens) {
  if (cls_token.size() != image_proj.rows() || image_proj.cols() % t_tokens != 0) {
    throw Error(ErrorCode::kShapeMismatch, "cls token does not fit the image projection");
  }
  const ag::Var flat = ag::MatMul(ag::Var::Constant(Matrix(cls_token)), image_proj);
  return ag::Reshape(flat, t_tokens, image_proj.cols() / t_tokens);
}

ag::Var LocalResidual(const Matrix& patch_tokens, int grid, const ag::Var& kernel, int height, int width) {
  if (patch_tokens.rows() != static_cast<Index>(grid) * grid || patch_tokens.cols() != kernel.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("patch tokens {}x{} do not fit a {}-grid kernel of {} rows", patch_tokens.rows(),
                            patch_tokens.cols(), grid, kernel.rows()));
  }
  return ag::LeftApply(BilinearResizeOperator(grid, grid, height, width),
                       ag::MatMul(ag::Var::Constant(patch_tokens), kernel));
}

diffusion::SpatialMap InjectLocal(const diffusion::SpatialMap& f, const Matrix& patch_tokens, int grid,
                                  const ag::Var& kernel) {
  if (kernel.cols() != f.channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("kernel maps to {} channels, block has {}", kernel.cols(), f.channels()));
  }
  return {f.height, f.width, ag::Add(f.data, LocalResidual(patch_tokens, grid, kernel, f.height, f.width))};
}

}  // namespace sbsr::conditioning
