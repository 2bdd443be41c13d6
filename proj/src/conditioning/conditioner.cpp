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

#include "sbsr/conditioning/conditioner.hpp"

#include "sbsr/conditioning/prompts.hpp"
#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::conditioning {

std::vector<ag::Var> ConditioningParams::Trainable() const {
  std::vector<ag::Var> out{soft_prompt, injection.image_proj};
  for (const auto& kv : injection.image_kv) {
    out.push_back(kv.key);
    out.push_back(kv.value);
  }
  for (const auto& k : injection.local_kernels) out.push_back(k);
  return out;
}

Conditioner::Conditioner(ConditioningConfig config, const diffusion::Backbone& backbone,
                         const vl::VisionLanguageEncoder& encoder)
    : config_(config), backbone_(backbone), encoder_(encoder), empty_hard_(backbone.EncodeText("")) {
  config_.Validate();
}

ConditioningParams Conditioner::InitParams(std::uint64_t seed) const {
  ConditioningParams p;
  p.soft_prompt = MakeSoftPrompt(backbone_.dims(), config_.soft_init_std, HashCombine(seed, Fnv1a64("soft_prompt")));
  p.injection = MakeInjectionParams(
      config_, backbone_.dims(),
      {backbone_.attention_sites(), encoder_.cls_dim(), encoder_.patch_width()}, seed);
  return p;
}

ItemConditioning Conditioner::Prepare(const Image& image, std::string caption) const {
  ItemConditioning item;
  item.hard = config_.use_hard ? EncodeHardPrompt(caption, backbone_).embedding : empty_hard_;
  item.caption = std::move(caption);
  if (config_.use_global || config_.use_local) item.visual = encoder_.EncodeVisualTokens(image);
  return item;
}

ConditioningBundle Conditioner::Assemble(const ItemConditioning& item, const ConditioningParams& params,
                                         int latent_height, int latent_width) const {
  ConditioningBundle b;
  const ag::Var soft = config_.use_soft ? params.soft_prompt
                                        : ag::Var::Constant(Matrix::Zero(params.soft_prompt.rows(),
                                                                         params.soft_prompt.cols()));
  auto [context, pooled] = BuildContext(item.hard, soft);
  b.context = context;
  b.pooled = pooled;
  b.ip_scale = config_.ip_scale;
  if (config_.use_global) {
    b.image_tokens = ProjectGlobal(item.visual.cls_token, params.injection.image_proj, config_.t_tokens);
    b.image_kv = params.injection.image_kv;
  }
  if (config_.use_local) {
    for (int k = 0; k < diffusion::kDownBlocks; ++k) {
      b.local_maps[static_cast<std::size_t>(k)] =
          LocalResidual(item.visual.patch_tokens, item.visual.grid,
                        params.injection.local_kernels[static_cast<std::size_t>(k)], latent_height >> k,
                        latent_width >> k);
    }
  }
  return b;
}

ag::Var Conditioner::SoftPromptPenalty(const ConditioningParams& params) const {
  if (!config_.use_soft || config_.soft_l2 == 0.0) return ag::Var::Constant(Matrix::Zero(1, 1));
  return ag::Scale(ag::SumSquares(params.soft_prompt), config_.soft_l2);
}

std::uint64_t ConditioningHash(const ConditioningConfig& config, const ConditioningParams& params) {
  std::uint64_t h = Fnv1a64(nlohmann::json(config).dump());
  for (const auto& v : params.Trainable()) h = HashCombine(h, MatrixChecksum(v.value()));
  return h;
}

}  // namespace sbsr::conditioning
