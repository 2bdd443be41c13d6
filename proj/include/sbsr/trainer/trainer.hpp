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
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sbsr/dataset/split.hpp"
#include "sbsr/trainer/checkpoint.hpp"

namespace sbsr::trainer {

// Parameter-independent training inputs for the seen categories, prepared once.
struct TrainingData {
  std::vector<std::string> class_names;  // seen categories, sorted; label = index
  std::vector<PreparedImage> sketches;
  std::vector<int> sketch_labels;
  std::vector<std::vector<PreparedImage>> shapes;  // selected views per shape
  std::vector<int> shape_labels;
  std::vector<std::vector<int>> sketches_by_class;
  std::vector<std::vector<int>> shapes_by_class;
};

// Train-role sketches and all shapes of seen categories. InsufficientData when
// a seen category has no shape or no training sketch.
TrainingData PrepareTrainingData(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split,
                                 const Embedder& embedder);

struct TrainBatch {
  std::vector<int> sketches;  // indices into TrainingData::sketches
  std::vector<int> shapes;    // indices into TrainingData::shapes
  std::vector<int> sketch_labels;
  std::vector<int> shape_labels;
};

// P classes x (K sketches + K shapes). P is clamped to the class count; a
// class with fewer than K items is sampled with replacement.
TrainBatch BuildBatch(const TrainingData& data, int classes_per_batch, int per_class, std::mt19937_64& rng);

// Randomness for step `step` of a run; resuming at a step reproduces it.
std::mt19937_64 StepRng(std::uint64_t seed, std::int64_t step, std::string_view stream);

struct StepLosses {
  std::int64_t step = 0;
  double ske = 0.0;
  double view = 0.0;
  double cls_view = 0.0;
  double cls_ske = 0.0;
  double soft_l2 = 0.0;
  double total = 0.0;  // ske + view + eta * cls_view (+ eta * cls_ske when enabled)
  double grad_norm = 0.0;
};

nlohmann::json ToJson(const StepLosses& l);
StepLosses StepLossesFromJson(const nlohmann::json& j);

// One forward/backward/update. NonFiniteLoss (before any update) if a component is NaN/Inf.
StepLosses TrainStep(const Embedder& embedder, const TrainingData& data, const TrainBatch& batch,
                     ModelParams& params, AdamW& optimizer, std::int64_t step);

struct FitOptions {
  std::optional<std::filesystem::path> resume;
  bool write_files = true;  // checkpoints and loss trace under the run dir
  std::function<void(const StepLosses&)> on_step;
};

struct FitResult {
  CheckpointBundle final;
  std::vector<StepLosses> trace;  // steps run by this call
  std::uint64_t backbone_checksum_before = 0;
  std::uint64_t backbone_checksum_after = 0;
  std::optional<std::filesystem::path> final_checkpoint;
};

std::int64_t TotalSteps(const TrainConfig& config, const TrainingData& data);

// Builds the mock or configured assets from the config and trains.
FitResult Fit(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split, const TrainConfig& config,
              const FitOptions& options = {});

// Same, with caller-provided assets.
FitResult Fit(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split, const Embedder& embedder,
              const FitOptions& options = {});

std::vector<StepLosses> ReadLossTrace(const std::filesystem::path& path);

}  // namespace sbsr::trainer
