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

#include "sbsr/trainer/config.hpp"

#include <fmt/core.h>

#include "sbsr/core/error.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::trainer {

DeviceProfile ProfileByName(std::string_view name) {
  DeviceProfile p;
  if (name == "full") return p;
  if (name == "desk") {
    p.name = "desk";
    p.backbone = diffusion::BackboneDims::Desk();
    p.encoder.embedding_dim = 64;
    p.encoder.input_size = 56;
    p.encoder.patch_size = 7;
    p.encoder.patch_width = 64;
    p.encoder.cls_dim = 64;
    p.embedding_dim = 128;
    p.resolution = 64;
    return p;
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown device profile '{}' (full|desk)", name));
}

DeviceProfile TrainConfig::ResolvedProfile() const {
  DeviceProfile p = ProfileByName(profile);
  if (resolution > 0) p.resolution = resolution;
  return p;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0) || batch_size <= 0 || classes_per_batch <= 0 ||
      per_class() < 1 || epochs < 0 || max_steps < 0 || top_k_views < 1 || !(grad_clip >= 0.0) ||
      checkpoint_every < 0) {
    throw Error(ErrorCode::kInvalidArgument, "train config has an out-of-range value");
  }
  const int res = ResolvedProfile().resolution;
  if (res % 32 != 0) throw Error(ErrorCode::kBadImageSize, fmt::format("resolution {} must divide by 32", res));
  conditioning.Validate();
  objective.circle.Validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"name", c.name},
       {"seed", c.seed},
       {"learning_rate", c.learning_rate},
       {"weight_decay", c.weight_decay},
       {"batch_size", c.batch_size},
       {"classes_per_batch", c.classes_per_batch},
       {"epochs", c.epochs},
       {"max_steps", c.max_steps},
       {"timestep", c.timestep},
       {"profile", c.profile},
       {"resolution", c.resolution},
       {"top_k_views", c.top_k_views},
       {"grad_clip", c.grad_clip},
       {"adam_beta1", c.adam_beta1},
       {"adam_beta2", c.adam_beta2},
       {"adam_eps", c.adam_eps},
       {"checkpoint_every", c.checkpoint_every},
       {"backbone", c.backbone},
       {"encoder", c.encoder},
       {"captioner", c.captioner},
       {"run_root", c.run_root.string()},
       {"conditioning", c.conditioning},
       {"objective", c.objective}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.name = j.value("name", c.name);
  c.seed = j.value("seed", c.seed);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.classes_per_batch = j.value("classes_per_batch", c.classes_per_batch);
  c.epochs = j.value("epochs", c.epochs);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.timestep = j.value("timestep", c.timestep);
  c.profile = j.value("profile", c.profile);
  c.resolution = j.value("resolution", c.resolution);
  c.top_k_views = j.value("top_k_views", c.top_k_views);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.backbone = j.value("backbone", c.backbone);
  c.encoder = j.value("encoder", c.encoder);
  c.captioner = j.value("captioner", c.captioner);
  c.run_root = j.value("run_root", c.run_root.string());
  if (j.contains("conditioning")) c.conditioning = j.at("conditioning").get<conditioning::ConditioningConfig>();
  if (j.contains("objective")) c.objective = j.at("objective").get<objectives::ObjectiveConfig>();
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  try {
    TrainConfig c = nlohmann::json::parse(ReadFile(path)).get<TrainConfig>();
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace sbsr::trainer
