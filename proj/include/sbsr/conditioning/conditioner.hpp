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
#include <vector>

#include "sbsr/conditioning/bundle.hpp"
#include "sbsr/conditioning/config.hpp"
#include "sbsr/conditioning/injection.hpp"
#include "sbsr/diffusion/backbone.hpp"
#include "sbsr/viewselect/vision_language.hpp"

namespace sbsr::conditioning {

struct ConditioningParams {
  ag::Var soft_prompt;
  InjectionParams injection;

  // Fixed order: soft prompt, image projection, per-site key/value, local kernels.
  std::vector<ag::Var> Trainable() const;
};

// Parameter-independent inputs for one image, computed once and reused.
struct ItemConditioning {
  std::string caption;
  Matrix hard;  // encoded caption; the empty-string encoding when hard prompts are off
  vl::VisualTokens visual;
};

class Conditioner {
 public:
  Conditioner(ConditioningConfig config, const diffusion::Backbone& backbone,
              const vl::VisionLanguageEncoder& encoder);

  ConditioningParams InitParams(std::uint64_t seed) const;
  ItemConditioning Prepare(const Image& image, std::string caption) const;

  // Bundle for a latent of (latent_height x latent_width); switched-off
  // pathways are left undefined or zero-filled per the config toggles.
  ConditioningBundle Assemble(const ItemConditioning& item, const ConditioningParams& params, int latent_height,
                              int latent_width) const;

  // soft_l2 * ||soft||^2, or a constant zero when soft prompts are off.
  ag::Var SoftPromptPenalty(const ConditioningParams& params) const;

  const ConditioningConfig& config() const { return config_; }

 private:
  ConditioningConfig config_;
  const diffusion::Backbone& backbone_;
  const vl::VisionLanguageEncoder& encoder_;
  Matrix empty_hard_;
};

// Digest of the toggles and current parameter values; keys the feature cache.
std::uint64_t ConditioningHash(const ConditioningConfig& config, const ConditioningParams& params);

}  // namespace sbsr::conditioning
