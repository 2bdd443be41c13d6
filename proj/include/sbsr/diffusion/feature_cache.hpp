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
#include <optional>
#include <string>

#include "sbsr/diffusion/features.hpp"

namespace sbsr::diffusion {

enum class CacheDtype : std::uint32_t { kFloat32 = 0, kFloat64 = 1 };

struct FeatureCacheKey {
  std::string item_id;
  int timestep = kDefaultTimestep;
  std::uint64_t conditioning_hash = 0;

  std::string FileName() const;
};

// Per-item blobs: magic, version, six (h, w, c) tuples, dtype, then the maps
// row-major. Loaded maps are constants (no gradient path).
class FeatureCache {
 public:
  static constexpr char kMagic[8] = {'S', 'B', 'S', 'R', 'F', 'E', 'A', 'T'};
  static constexpr std::uint32_t kVersion = 1;

  explicit FeatureCache(std::filesystem::path root, CacheDtype dtype = CacheDtype::kFloat64);

  std::optional<MultiScaleFeatures> Load(const FeatureCacheKey& key) const;
  void Store(const FeatureCacheKey& key, const MultiScaleFeatures& features) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  CacheDtype dtype_;
};

std::string SerializeFeatures(const MultiScaleFeatures& features, CacheDtype dtype);
// ParseError on a malformed blob.
MultiScaleFeatures DeserializeFeatures(const std::string& bytes);

}  // namespace sbsr::diffusion
