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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "sbsr/autograd/autograd.hpp"
#include "sbsr/diffusion/backbone.hpp"

namespace sbsr::conditioning {

struct HardPrompt {
  std::string text;
  Matrix embedding;  // (text_tokens x text_width_l)
};

// InvalidArgument on empty text.
HardPrompt EncodeHardPrompt(std::string_view text, const diffusion::Backbone& backbone);

// Learnable (text_tokens + 1) x pooled_width tensor; row 0 feeds the pooled
// embedding, rows 1.. extend the per-token context.
ag::Var MakeSoftPrompt(const diffusion::BackboneDims& dims, double init_std, std::uint64_t seed);

struct ContextPair {
  ag::Var context;  // (text_tokens x context_width)
  ag::Var pooled;   // (1 x pooled_width)
};

// context[i] = [hard[i], soft[i + 1]], pooled = soft[0]. ShapeMismatch when the row counts disagree.
ContextPair BuildContext(const Matrix& hard, const ag::Var& soft);

}  // namespace sbsr::conditioning
