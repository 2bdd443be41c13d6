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

#include "sbsr/eval/evaluate.hpp"

#include "sbsr/core/error.hpp"

namespace sbsr::eval {

aggregation::EmbeddingStore EmbedGallery(const dataset::DatasetManifest& manifest,
                                         const std::set<std::string>& categories, const trainer::Embedder& embedder,
                                         const trainer::ModelParams& params, const diffusion::FeatureCache* cache) {
  aggregation::EmbeddingStore store;
  store.modality = aggregation::Modality::kShape;
  store.manifest_hash = dataset::ManifestHash(manifest);
  std::vector<RowVector> rows;
  for (const auto& shape : manifest.shapes) {
    if (!categories.contains(shape.category)) continue;
    const auto views = embedder.PrepareShape(shape);
    rows.push_back(embedder.EvalShape(views, params, cache));
    store.ids.push_back(shape.shape_id);
    store.labels.push_back(shape.category);
  }
  store.vectors.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) store.vectors.row(static_cast<Index>(i)) = rows[i];
  return store;
}

aggregation::EmbeddingStore EmbedQueries(const dataset::DatasetManifest& manifest,
                                         const std::set<std::string>& categories, const trainer::Embedder& embedder,
                                         const trainer::ModelParams& params, const diffusion::FeatureCache* cache) {
  aggregation::EmbeddingStore store;
  store.modality = aggregation::Modality::kSketch;
  store.manifest_hash = dataset::ManifestHash(manifest);
  std::vector<RowVector> rows;
  for (const auto& sketch : manifest.sketches) {
    if (sketch.role != dataset::Role::kTest || !categories.contains(sketch.category)) continue;
    rows.push_back(embedder.EvalSketch(embedder.PrepareSketch(sketch), params, cache));
    store.ids.push_back(sketch.sketch_id);
    store.labels.push_back(sketch.category);
  }
  store.vectors.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) store.vectors.row(static_cast<Index>(i)) = rows[i];
  return store;
}

Evaluation EvaluateParams(const trainer::ModelParams& params, const dataset::DatasetManifest& manifest,
                          const dataset::SplitSpec& split, const trainer::Embedder& embedder,
                          const EvaluationOptions& options) {
  std::optional<diffusion::FeatureCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);
  const diffusion::FeatureCache* cache_ptr = cache ? &*cache : nullptr;

  const auto gallery = EmbedGallery(manifest, split.unseen_categories, embedder, params, cache_ptr);
  const auto queries = EmbedQueries(manifest, split.unseen_categories, embedder, params, cache_ptr);
  if (queries.size() == 0) throw Error(ErrorCode::kInsufficientData, "no test sketches in the unseen categories");

  Evaluation ev;
  ev.index = EmbeddingIndex::FromStore(gallery);
  ev.query_ids = queries.ids;
  ev.query_labels = queries.labels;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    ev.rankings.push_back(Rank(queries.vectors.row(static_cast<Index>(q)), ev.index, queries.ids[q]));
  }
  ev.report = ComputeMetrics(ev.rankings, ev.query_labels, ev.index, options.e_cutoff);
  return ev;
}

Evaluation Evaluate(const trainer::CheckpointBundle& checkpoint, const dataset::DatasetManifest& manifest,
                    const dataset::SplitSpec& split, const trainer::Embedder& embedder,
                    const EvaluationOptions& options) {
  const trainer::ModelParams params = trainer::ParamsFromCheckpoint(checkpoint, embedder);
  return EvaluateParams(params, manifest, split, embedder, options);
}

}  // namespace sbsr::eval
