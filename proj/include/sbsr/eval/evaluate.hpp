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

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sbsr/aggregation/embedding_store.hpp"
#include "sbsr/dataset/split.hpp"
#include "sbsr/eval/metrics.hpp"
#include "sbsr/trainer/checkpoint.hpp"

namespace sbsr::eval {

struct EvaluationOptions {
  std::optional<std::filesystem::path> cache_dir;  // feature cache root
  int e_cutoff = kECutoff;
};

// Shape embeddings (view-pooled) for every shape in `categories`.
aggregation::EmbeddingStore EmbedGallery(const dataset::DatasetManifest& manifest,
                                         const std::set<std::string>& categories, const trainer::Embedder& embedder,
                                         const trainer::ModelParams& params,
                                         const diffusion::FeatureCache* cache = nullptr);

// Test-role sketch embeddings for `categories`.
aggregation::EmbeddingStore EmbedQueries(const dataset::DatasetManifest& manifest,
                                         const std::set<std::string>& categories, const trainer::Embedder& embedder,
                                         const trainer::ModelParams& params,
                                         const diffusion::FeatureCache* cache = nullptr);

struct Evaluation {
  MetricsReport report;
  EmbeddingIndex index;
  std::vector<std::string> query_ids;
  std::vector<std::string> query_labels;
  std::vector<RankedList> rankings;
};

// Zero-shot protocol: unseen-category test sketches against all unseen shapes.
Evaluation EvaluateParams(const trainer::ModelParams& params, const dataset::DatasetManifest& manifest,
                          const dataset::SplitSpec& split, const trainer::Embedder& embedder,
                          const EvaluationOptions& options = {});
Evaluation Evaluate(const trainer::CheckpointBundle& checkpoint, const dataset::DatasetManifest& manifest,
                    const dataset::SplitSpec& split, const trainer::Embedder& embedder,
                    const EvaluationOptions& options = {});

}  // namespace sbsr::eval
