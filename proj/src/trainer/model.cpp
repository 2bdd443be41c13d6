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

#include "sbsr/trainer/model.hpp"

#include <fmt/core.h>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::trainer {

std::vector<NamedParam> ModelParams::Named() const {
  std::vector<NamedParam> out;
  const auto& c = conditioning;
  out.push_back({"soft_prompt", c.soft_prompt, true});
  out.push_back({"image_proj", c.injection.image_proj, true});
  for (std::size_t s = 0; s < c.injection.image_kv.size(); ++s) {
    out.push_back({fmt::format("image_kv{}.key", s), c.injection.image_kv[s].key, true});
    out.push_back({fmt::format("image_kv{}.value", s), c.injection.image_kv[s].value, true});
  }
  for (std::size_t k = 0; k < c.injection.local_kernels.size(); ++k) {
    out.push_back({fmt::format("local_kernel{}", k), c.injection.local_kernels[k], true});
  }
  for (std::size_t k = 0; k < aggregation.adapters.size(); ++k) {
    const auto& a = aggregation.adapters[k];
    const std::string p = fmt::format("adapter{}", k);
    out.push_back({p + ".proj_w", a.proj_w, true});
    out.push_back({p + ".proj_b", a.proj_b, true});
    for (std::size_t r = 0; r < a.refine.size(); ++r) {
      const auto& b = a.refine[r];
      const std::string q = fmt::format("{}.refine{}", p, r);
      out.push_back({q + ".norm1_gamma", b.norm1_gamma, true});
      out.push_back({q + ".norm1_beta", b.norm1_beta, true});
      out.push_back({q + ".conv1_w", b.conv1_w, true});
      out.push_back({q + ".conv1_b", b.conv1_b, true});
      out.push_back({q + ".norm2_gamma", b.norm2_gamma, true});
      out.push_back({q + ".norm2_beta", b.norm2_beta, true});
      out.push_back({q + ".conv2_w", b.conv2_w, true});
      out.push_back({q + ".conv2_b", b.conv2_b, true});
    }
  }
  out.push_back({"fusion_alpha", aggregation.alpha, false});
  out.push_back({"classifier.weight", head.weight, true});
  out.push_back({"classifier.temperature", head.temperature, false});
  return out;
}

Assets MakeAssets(const TrainConfig& config) {
  const DeviceProfile profile = config.ResolvedProfile();
  Assets a;
  a.backbone = diffusion::MakeBackbone(config.backbone, profile.backbone);
  a.encoder = vl::MakeVisionLanguageEncoder(config.encoder, profile.encoder);
  a.captioner = conditioning::MakeCaptioner(config.captioner);
  return a;
}

std::string ViewItemId(std::string_view shape_id, int view_index) {
  return fmt::format("{}#view{}", shape_id, view_index);
}

Embedder::Embedder(TrainConfig config, const diffusion::Backbone& backbone, const vl::VisionLanguageEncoder& encoder,
                   const conditioning::Captioner& captioner)
    : config_(std::move(config)),
      profile_(config_.ResolvedProfile()),
      backbone_(backbone),
      encoder_(encoder),
      captioner_(captioner),
      conditioner_(config_.conditioning, backbone, encoder),
      backbone_checksum_(backbone.WeightChecksum()) {
  config_.Validate();
}

ModelParams Embedder::InitParams(std::vector<std::string> class_names) const {
  ModelParams p;
  p.conditioning = conditioner_.InitParams(HashCombine(config_.seed, Fnv1a64("conditioning")));
  std::array<int, diffusion::kHookCount> channels{};
  for (int k = 0; k < diffusion::kHookCount; ++k) channels[static_cast<std::size_t>(k)] = backbone_.dims().hook_channels(k);
  p.aggregation = aggregation::MakeAggregationParams(channels, profile_.embedding_dim,
                                                     HashCombine(config_.seed, Fnv1a64("aggregation")));
  p.head = objectives::MakeClassifierHead(std::move(class_names), profile_.embedding_dim,
                                          config_.objective.cls_temperature, config_.seed);
  return p;
}

PreparedImage Embedder::Prepare(std::string id, const Image& image, std::string caption) const {
  const Image input = PrepareInput(image, profile_.resolution);
  PreparedImage item;
  item.id = std::move(id);
  item.latent = backbone_.EncodeLatent(input);
  item.conditioning = conditioner_.Prepare(input, std::move(caption));
  return item;
}

PreparedImage Embedder::PrepareSketch(const dataset::SketchRecord& sketch) const {
  const Image image = ReadPng(sketch.image_uri);
  std::string caption = sketch.caption.empty()
                            ? captioner_.Caption(image, conditioning::Modality::kSketch, sketch.category)
                            : sketch.caption;
  return Prepare(sketch.sketch_id, image, std::move(caption));
}

std::vector<PreparedImage> Embedder::PrepareShape(const dataset::ShapeRecord& shape) const {
  if (shape.view_uris.empty()) throw Error(ErrorCode::kEmptyViewSet, "shape " + shape.shape_id + " has no views");
  const std::size_t n = std::min(shape.view_uris.size(), static_cast<std::size_t>(config_.top_k_views));
  std::vector<PreparedImage> views;
  views.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    const Image image = ReadPng(shape.view_uris[v]);
    std::string caption = shape.caption.empty()
                              ? captioner_.Caption(image, conditioning::Modality::kRender, shape.category)
                              : shape.caption;
    views.push_back(Prepare(ViewItemId(shape.shape_id, static_cast<int>(v)), image, std::move(caption)));
  }
  return views;
}

diffusion::MultiScaleFeatures Embedder::Features(const PreparedImage& item, const ModelParams& params,
                                                 std::uint64_t epsilon_seed) const {
  const auto bundle =
      conditioner_.Assemble(item.conditioning, params.conditioning, item.latent.height, item.latent.width);
  return diffusion::ExtractFeaturesFromLatent(item.latent, bundle, config_.timestep, epsilon_seed, backbone_);
}

ag::Var Embedder::EmbedRaw(const PreparedImage& item, const ModelParams& params, std::uint64_t epsilon_seed) const {
  return aggregation::EmbedFeaturesRaw(Features(item, params, epsilon_seed), params.aggregation);
}

ag::Var Embedder::EmbedSketch(const PreparedImage& item, const ModelParams& params, std::uint64_t epsilon_seed) const {
  return ag::L2NormalizeRows(EmbedRaw(item, params, epsilon_seed));
}

ag::Var Embedder::EmbedShape(std::span<const PreparedImage> views, const ModelParams& params,
                             std::span<const std::uint64_t> epsilon_seeds) const {
  if (views.size() != epsilon_seeds.size()) throw Error(ErrorCode::kShapeMismatch, "one noise seed per view");
  std::vector<ag::Var> raw;
  raw.reserve(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) raw.push_back(EmbedRaw(views[v], params, epsilon_seeds[v]));
  return aggregation::PoolViews(raw);
}

ag::Var Embedder::EvalRaw(const PreparedImage& item, const ModelParams& params,
                          const diffusion::FeatureCache* cache) const {
  const std::uint64_t eps = diffusion::EpsilonSeedForItem(item.id);
  if (cache == nullptr) return EmbedRaw(item, params, eps);
  std::uint64_t h = conditioning::ConditioningHash(config_.conditioning, params.conditioning);
  h = HashCombine(h, Fnv1a64(item.conditioning.caption));
  h = HashCombine(h, static_cast<std::uint64_t>(profile_.resolution));
  h = HashCombine(h, backbone_checksum_);
  const diffusion::FeatureCacheKey key{item.id, config_.timestep, h};
  auto features = cache->Load(key);
  if (!features) {
    features = Features(item, params, eps);
    cache->Store(key, *features);
  }
  return aggregation::EmbedFeaturesRaw(*features, params.aggregation);
}

RowVector Embedder::EvalSketch(const PreparedImage& item, const ModelParams& params,
                               const diffusion::FeatureCache* cache) const {
  return ag::L2NormalizeRows(EvalRaw(item, params, cache)).value().row(0);
}

RowVector Embedder::EvalShape(std::span<const PreparedImage> views, const ModelParams& params,
                              const diffusion::FeatureCache* cache) const {
  std::vector<ag::Var> raw;
  raw.reserve(views.size());
  for (const auto& v : views) raw.push_back(EvalRaw(v, params, cache));
  return aggregation::PoolViews(raw).value().row(0);
}

}  // namespace sbsr::trainer
