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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "sbsr/dataset/manifest.hpp"

namespace sbsr::dataset {

enum class Protocol {
  kSplitI,   // alphabetical prefix of categories is seen
  kSplitII,  // categories with few gallery shapes are unseen
};

std::string_view ToString(Protocol p);
Protocol ParseProtocol(std::string_view text);  // "split1" | "split2"

struct SplitSpec {
  Protocol protocol = Protocol::kSplitI;
  std::set<std::string> seen_categories;
  std::set<std::string> unseen_categories;

  bool IsSeen(std::string_view category) const { return seen_categories.contains(std::string(category)); }
};

// Published cardinalities of a complete benchmark release.
struct OfficialCounts {
  std::string_view name;
  std::size_t categories;
  std::size_t shapes;
  std::size_t sketches;
  std::size_t split1_seen;
  std::size_t split2_unseen;
};

std::optional<OfficialCounts> FindOfficialCounts(std::string_view dataset_name);

// True when the manifest has exactly the official category/shape/sketch counts.
bool IsOfficialRelease(const DatasetManifest& manifest);

inline constexpr std::size_t kSplitIIShapeThreshold = 5;

struct SplitOptions {
  // Overrides the number of unseen categories under Split-I (fixtures only).
  std::optional<std::size_t> split1_unseen;
  // Split-II: categories with at most this many shapes are unseen.
  std::size_t split2_threshold = kSplitIIShapeThreshold;
};

// Split-I on a full release takes the published seen count; on a partial
// manifest the seen fraction of the matching release (SHREC13 by default) is
// applied to its category count. Split-II applies the shape-count rule as-is.
// CountMismatch is raised only for official releases whose computed sizes
// disagree with the published ones.
SplitSpec MakeSplit(const DatasetManifest& manifest, Protocol protocol, const SplitOptions& options = {});

// Marks every sketch of an unseen category as a test item.
void ApplyZeroShotRoles(DatasetManifest& manifest, const SplitSpec& split);

void WriteSplitFile(const std::filesystem::path& path, const SplitSpec& split);
SplitSpec ReadSplitFile(const std::filesystem::path& path);

}  // namespace sbsr::dataset
