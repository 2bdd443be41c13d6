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
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "sbsr/conditioning/config.hpp"
#include "sbsr/diffusion/features.hpp"
#include "sbsr/objectives/losses.hpp"
#include "sbsr/viewselect/vision_language.hpp"

namespace sbsr::trainer {

// Model widths and input resolution. "full" matches the backbone-native
// shapes; "desk" keeps the topology with narrow widths and 64 px inputs so the
// whole pipeline trains on one CPU core.
struct DeviceProfile {
  std::string name = "full";
  diffusion::BackboneDims backbone;
  vl::VisionEncoderDims encoder;
  int embedding_dim = 1280;
  int resolution = 1024;
};

// InvalidArgument for an unknown name.
DeviceProfile ProfileByName(std::string_view name);

struct TrainConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  double learning_rate = 1e-4;
  double weight_decay = 0.09;
  int batch_size = 50;
  int classes_per_batch = 5;  // P; K = batch_size / (2 P)
  int epochs = 100;
  int max_steps = 0;  // when positive, caps the run
  int timestep = diffusion::kDefaultTimestep;
  std::string profile = "full";
  int resolution = 0;  // 0 keeps the profile's resolution
  int top_k_views = 3;
  double grad_clip = 5.0;  // global norm; 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 0;  // steps; 0 writes only the final checkpoint
  std::string backbone = "mock";
  std::string encoder = "mock";
  std::string captioner = "stub";
  std::filesystem::path run_root = "runs";
  conditioning::ConditioningConfig conditioning;
  objectives::ObjectiveConfig objective;

  int per_class() const { return batch_size / (2 * classes_per_batch); }
  DeviceProfile ResolvedProfile() const;
  std::filesystem::path run_dir() const { return run_root / name; }
  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig LoadTrainConfig(const std::filesystem::path& path);

}  // namespace sbsr::trainer
