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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sbsr/aggregation/aggregation.hpp"
#include "sbsr/conditioning/captioner.hpp"
#include "sbsr/conditioning/conditioner.hpp"
#include "sbsr/dataset/manifest.hpp"
#include "sbsr/diffusion/feature_cache.hpp"
#include "sbsr/objectives/losses.hpp"
#include "sbsr/trainer/config.hpp"

namespace sbsr::trainer {

struct NamedParam {
  std::string name;
  ag::Var var;
  bool decay = true;
};

// The complete trainable set. The backbone and encoders are never part of it.
struct ModelParams {
  conditioning::ConditioningParams conditioning;
  aggregation::AggregationParams aggregation;
  objectives::ClassifierHead head;

  // Stable names and order; fusion alpha and the temperature skip weight decay.
  std::vector<NamedParam> Named() const;
};

// Everything about one image that does not depend on trainable parameters.
struct PreparedImage {
  std::string id;
  diffusion::LatentMap latent;
  conditioning::ItemConditioning conditioning;
};

// Shared image -> embedding path for training, offline evaluation and the service.
class Embedder {
 public:
  Embedder(TrainConfig config, const diffusion::Backbone& backbone, const vl::VisionLanguageEncoder& encoder,
           const conditioning::Captioner& captioner);

  ModelParams InitParams(std::vector<std::string> class_names) const;

  // Applies the pinned input contract (opaque RGB on white at the profile resolution).
  PreparedImage Prepare(std::string id, const Image& image, std::string caption) const;
  // Uses the cached caption when present, otherwise captions the image.
  PreparedImage PrepareSketch(const dataset::SketchRecord& sketch) const;
  // The shape's selected views (first top_k_views of view_uris). EmptyViewSet if none.
  std::vector<PreparedImage> PrepareShape(const dataset::ShapeRecord& shape) const;

  diffusion::MultiScaleFeatures Features(const PreparedImage& item, const ModelParams& params,
                                         std::uint64_t epsilon_seed) const;
  // Pre-normalization fused vector.
  ag::Var EmbedRaw(const PreparedImage& item, const ModelParams& params, std::uint64_t epsilon_seed) const;
  ag::Var EmbedSketch(const PreparedImage& item, const ModelParams& params, std::uint64_t epsilon_seed) const;
  ag::Var EmbedShape(std::span<const PreparedImage> views, const ModelParams& params,
                     std::span<const std::uint64_t> epsilon_seeds) const;

  // Deterministic evaluation path: per-item noise seeds, optional feature cache.
  RowVector EvalSketch(const PreparedImage& item, const ModelParams& params,
                       const diffusion::FeatureCache* cache = nullptr) const;
  RowVector EvalShape(std::span<const PreparedImage> views, const ModelParams& params,
                      const diffusion::FeatureCache* cache = nullptr) const;

  const TrainConfig& config() const { return config_; }
  const DeviceProfile& profile() const { return profile_; }
  const diffusion::Backbone& backbone() const { return backbone_; }
  const conditioning::Conditioner& conditioner() const { return conditioner_; }

 private:
  ag::Var EvalRaw(const PreparedImage& item, const ModelParams& params, const diffusion::FeatureCache* cache) const;

  TrainConfig config_;
  DeviceProfile profile_;
  const diffusion::Backbone& backbone_;
  const vl::VisionLanguageEncoder& encoder_;
  const conditioning::Captioner& captioner_;
  conditioning::Conditioner conditioner_;
  std::uint64_t backbone_checksum_;
};

// Frozen assets named by a config: backbone, vision-language encoder, captioner.
struct Assets {
  std::unique_ptr<diffusion::Backbone> backbone;
  std::unique_ptr<vl::VisionLanguageEncoder> encoder;
  std::unique_ptr<conditioning::Captioner> captioner;
};

Assets MakeAssets(const TrainConfig& config);

// View item ids are "<shape id>#view<index>".
std::string ViewItemId(std::string_view shape_id, int view_index);

}  // namespace sbsr::trainer
