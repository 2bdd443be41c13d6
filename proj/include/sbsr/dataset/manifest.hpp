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
#include <string_view>
#include <vector>

namespace sbsr::dataset {

enum class Role { kTrain, kTest };

std::string_view ToString(Role role);
Role ParseRole(std::string_view text);

struct ShapeRecord {
  std::string shape_id;
  std::string category;
  std::string mesh_uri;
  // Rendered candidate views; after view selection, reordered and truncated
  // to the selected top-k with `view_scores` aligned.
  std::vector<std::string> view_uris;
  std::vector<double> view_scores;
  std::string caption;
};

struct SketchRecord {
  std::string sketch_id;
  std::string category;
  std::string image_uri;
  Role role = Role::kTrain;
  std::string caption;
};

struct DatasetManifest {
  std::string dataset_name;
  std::vector<ShapeRecord> shapes;
  std::vector<SketchRecord> sketches;
  std::vector<std::string> categories;  // sorted

  const ShapeRecord* FindShape(std::string_view id) const;
  const SketchRecord* FindSketch(std::string_view id) const;
  std::size_t ShapeCount(std::string_view category) const;
};

// Scans `<root>/<dataset>/sketches/<category>/[train|test/]<id>.png` and
// `<root>/<dataset>/shapes/<category>/<id>.(obj|off)`. Sketches placed
// directly in the category folder get role=train.
DatasetManifest LoadManifest(const std::filesystem::path& root, std::string_view dataset_name);

// Line-delimited JSON: one header line, then one record per line.
void WriteManifestFile(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest ReadManifestFile(const std::filesystem::path& path);

// Stable digest of the serialized manifest; used to pair checkpoints,
// gallery indexes and the service.
std::uint64_t ManifestHash(const DatasetManifest& manifest);

// Throws if ids are duplicated or a record's category is not listed.
void ValidateManifest(const DatasetManifest& manifest);

}  // namespace sbsr::dataset
