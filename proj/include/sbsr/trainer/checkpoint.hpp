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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sbsr/trainer/model.hpp"
#include "sbsr/trainer/optimizer.hpp"

namespace sbsr::trainer {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Trainable state only; the frozen backbone is identified by its checksum.
struct CheckpointBundle {
  std::uint32_t version = kCheckpointVersion;
  std::int64_t step = 0;
  std::int64_t optimizer_steps = 0;
  std::map<std::string, Matrix> params;
  std::map<std::string, Moments> moments;
  std::vector<std::string> class_names;
  std::string config_json;
  std::uint64_t manifest_hash = 0;
  std::uint64_t backbone_checksum = 0;
};

CheckpointBundle Capture(const ModelParams& params, const AdamW& optimizer, std::int64_t step,
                         const TrainConfig& config, std::uint64_t manifest_hash, std::uint64_t backbone_checksum);

// Writes values into `params` by name. CheckpointCorrupt on a missing name or shape change.
void RestoreParams(const CheckpointBundle& bundle, ModelParams& params);

// Rebuilds parameters for inference: initializes from the stored config and
// class names, then restores values.
ModelParams ParamsFromCheckpoint(const CheckpointBundle& bundle, const Embedder& embedder);

// Digest of the parameter values; pairs embedding indexes with checkpoints.
std::uint64_t CheckpointHash(const CheckpointBundle& bundle);

// Binary archive followed by an FNV-1a digest of the archive bytes.
void SaveCheckpoint(const std::filesystem::path& path, const CheckpointBundle& bundle);
// CheckpointCorrupt on a digest, version or decoding failure.
CheckpointBundle LoadCheckpoint(const std::filesystem::path& path);

std::string CheckpointFileName(std::int64_t step);

// Inference-ready model rebuilt from a checkpoint and its stored config.
struct LoadedModel {
  TrainConfig config;
  Assets assets;
  std::unique_ptr<Embedder> embedder;
  ModelParams params;
};

// `backbone_override` replaces the stored backbone id. IncompatibleAssets when
// the backbone weights differ from the ones the checkpoint was trained with.
LoadedModel LoadModel(const CheckpointBundle& bundle, const std::string& backbone_override = {});

}  // namespace sbsr::trainer
