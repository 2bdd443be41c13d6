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

#include "sbsr/viewselect/selection.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

#include "sbsr/core/error.hpp"

namespace sbsr::viewselect {

namespace {

double Cosine(const RowVector& a, const RowVector& b) {
  const double denom = a.norm() * b.norm();
  return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

}  // namespace

std::string AnchorPrompt(std::string_view category) { return fmt::format("a photo of {}.", category); }

std::vector<ViewEmbedding> EmbedViews(std::string_view shape_id, std::span<const Image> images,
                                      const vl::VisionLanguageEncoder& encoder) {
  std::vector<ViewEmbedding> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back({std::string(shape_id), static_cast<int>(i), encoder.EmbedImage(images[i])});
  }
  return out;
}

TextAnchor MakeTextAnchor(std::string_view category, const vl::VisionLanguageEncoder& encoder) {
  if (category.empty()) throw Error(ErrorCode::kInvalidArgument, "text anchor needs a category name");
  TextAnchor anchor;
  anchor.category = std::string(category);
  anchor.prompt = AnchorPrompt(category);
  anchor.vector = encoder.EmbedText(anchor.prompt);
  return anchor;
}

ViewSelection SelectTopK(std::span<const ViewEmbedding> views, const RowVector& target, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (views.empty()) throw Error(ErrorCode::kEmptyViewSet, "no candidate views");
  const std::size_t n = views.size();
  if (static_cast<std::size_t>(k) > n) {
    spdlog::warn("requested top-{} of {} views; clamping", k, n);
  }
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = Cosine(views[i].vector, target);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return views[a].view_index < views[b].view_index;
  });
  ViewSelection selection;
  selection.shape_id = views.front().shape_id;
  for (std::size_t i = 0; i < keep; ++i) {
    selection.selected_indices.push_back(views[order[i]].view_index);
    selection.scores.push_back(scores[order[i]]);
  }
  return selection;
}

ViewSelection SelectByCentrality(std::span<const ViewEmbedding> views, int k) {
  if (views.empty()) throw Error(ErrorCode::kEmptyViewSet, "no candidate views");
  RowVector mean = RowVector::Zero(views.front().vector.size());
  for (const auto& v : views) mean += v.vector;
  mean /= static_cast<double>(views.size());
  return SelectTopK(views, mean, k);
}

void SelectViewsForManifest(dataset::DatasetManifest& manifest, const vl::VisionLanguageEncoder& encoder, int k,
                            Fallback fallback) {
  for (auto& shape : manifest.shapes) {
    if (shape.view_uris.empty()) throw Error(ErrorCode::kEmptyViewSet, "shape " + shape.shape_id + " has no rendered views");
    std::vector<Image> images;
    images.reserve(shape.view_uris.size());
    for (const auto& uri : shape.view_uris) images.push_back(ReadPng(uri));
    const auto embeddings = EmbedViews(shape.shape_id, images, encoder);
    ViewSelection selection;
    if (!shape.category.empty()) {
      selection = SelectTopK(embeddings, MakeTextAnchor(shape.category, encoder).vector, k);
    } else if (fallback == Fallback::kCentrality) {
      selection = SelectByCentrality(embeddings, k);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "shape " + shape.shape_id + " has no category and no fallback");
    }
    std::vector<std::string> kept;
    for (int idx : selection.selected_indices) kept.push_back(shape.view_uris[static_cast<std::size_t>(idx)]);
    shape.view_uris = std::move(kept);
    shape.view_scores = selection.scores;
  }
}

}  // namespace sbsr::viewselect
