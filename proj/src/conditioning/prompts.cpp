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

#include "sbsr/conditioning/prompts.hpp"

#include <fmt/core.h>

#include <array>

#include "sbsr/core/error.hpp"

namespace sbsr::conditioning {

HardPrompt EncodeHardPrompt(std::string_view text, const diffusion::Backbone& backbone) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "hard prompt text is empty");
  return {std::string(text), backbone.EncodeText(text)};
}

ag::Var MakeSoftPrompt(const diffusion::BackboneDims& dims, double init_std, std::uint64_t seed) {
  return ag::Var::Parameter(GaussianMatrix(dims.text_tokens + 1, dims.pooled_width(), seed, init_std));
}

ContextPair BuildContext(const Matrix& hard, const ag::Var& soft) {
  if (soft.rows() != hard.rows() + 1) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("soft prompt has {} rows, hard prompt {}; need hard + 1", soft.rows(), hard.rows()));
  }
  const std::array<ag::Var, 2> parts{ag::Var::Constant(hard), ag::SliceRows(soft, 1, hard.rows())};
  return {ag::ConcatCols(parts), ag::SliceRows(soft, 0, 1)};
}

}  // namespace sbsr::conditioning
