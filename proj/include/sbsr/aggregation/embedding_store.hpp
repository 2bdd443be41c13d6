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
#include <string_view>
#include <vector>

#include "sbsr/core/tensor.hpp"

namespace sbsr::aggregation {

enum class Modality { kSketch, kShape, kView };

std::string_view ToString(Modality modality);
Modality ParseModality(std::string_view text);

// Unit-norm embeddings with ids and labels, plus the hashes that pair them
// with a manifest and checkpoint.
struct EmbeddingStore {
  Modality modality = Modality::kShape;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  Matrix vectors;  // (count x dim)
  std::uint64_t manifest_hash = 0;
  std::uint64_t checkpoint_hash = 0;

  std::size_t size() const { return ids.size(); }
  // Throws unless ids are unique, sizes agree and every row is unit norm within tol.
  void Validate(double tol = 1e-5) const;
};

inline constexpr char kEmbeddingMagic[8] = {'S', 'B', 'S', 'R', 'E', 'M', 'B', 'D'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

// Binary: magic, version, count, dim, hashes, modality, id/label table,
// float32 rows. A JSON sidecar `<path>.json` indexes ids and labels.
void WriteEmbeddingStore(const std::filesystem::path& path, const EmbeddingStore& store);
EmbeddingStore ReadEmbeddingStore(const std::filesystem::path& path);

}  // namespace sbsr::aggregation
