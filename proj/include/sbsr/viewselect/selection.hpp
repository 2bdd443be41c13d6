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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbsr/core/image.hpp"
#include "sbsr/core/tensor.hpp"
#include "sbsr/dataset/manifest.hpp"
#include "sbsr/viewselect/vision_language.hpp"

namespace sbsr::viewselect {

inline constexpr int kDefaultTopK = 3;

struct ViewEmbedding {
  std::string shape_id;
  int view_index = 0;
  RowVector vector;  // unit norm
};

struct TextAnchor {
  std::string category;
  std::string prompt;
  RowVector vector;  // unit norm
};

struct ViewSelection {
  std::string shape_id;
  std::vector<int> selected_indices;
  std::vector<double> scores;  // non-increasing, aligned with selected_indices
};

// "a photo of {category}."
std::string AnchorPrompt(std::string_view category);

std::vector<ViewEmbedding> EmbedViews(std::string_view shape_id, std::span<const Image> images,
                                      const vl::VisionLanguageEncoder& encoder);

TextAnchor MakeTextAnchor(std::string_view category, const vl::VisionLanguageEncoder& encoder);

// Top-k by cosine similarity to `target`; ties go to the lower view index.
// k larger than the candidate count is clamped (with a warning).
ViewSelection SelectTopK(std::span<const ViewEmbedding> views, const RowVector& target, int k);

// Label-free fallback: ranks views by similarity to their mean embedding.
ViewSelection SelectByCentrality(std::span<const ViewEmbedding> views, int k);

enum class Fallback { kNone, kCentrality };

// Loads every shape's rendered views, selects, and rewrites `view_uris` /
// `view_scores` in selection order.
void SelectViewsForManifest(dataset::DatasetManifest& manifest, const vl::VisionLanguageEncoder& encoder, int k,
                            Fallback fallback);

}  // namespace sbsr::viewselect
