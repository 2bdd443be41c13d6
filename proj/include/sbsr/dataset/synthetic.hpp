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
#include <vector>

#include "sbsr/core/image.hpp"
#include "sbsr/dataset/mesh.hpp"

namespace sbsr::dataset {

enum class Primitive { kBox, kSphere, kCylinder, kCone, kPyramid, kTorus };

struct SyntheticCategory {
  std::string name;
  Primitive primitive;
  int shape_count;
  int sketch_count;
};

struct SyntheticSpec {
  std::string dataset_name = "synthetic";
  std::vector<SyntheticCategory> categories;
  int sketch_size = 64;
  std::uint64_t seed = 11;
};

// Six primitive categories; four have 8 shapes and two have 4, so the
// shape-scarcity rule holds out exactly the latter two.
SyntheticSpec DefaultSyntheticSpec();

Mesh MakePrimitive(Primitive primitive);

// Silhouette outline of an orthographic render: black strokes, white ground.
Image SketchFromMesh(const Mesh& mesh, double azimuth_deg, double elevation_deg, int size, int stroke_radius = 1);

// Writes meshes and sketches in the on-disk corpus layout under
// `<root>/<dataset_name>/`. Deterministic for a given spec.
void GenerateSyntheticDataset(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace sbsr::dataset
