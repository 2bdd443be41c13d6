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

#include "sbsr/dataset/synthetic.hpp"

#include <fmt/core.h>

#include <random>

#include "sbsr/core/hash.hpp"
#include "sbsr/dataset/render.hpp"

namespace sbsr::dataset {

SyntheticSpec DefaultSyntheticSpec() {
  SyntheticSpec spec;
  spec.categories = {
      {"box", Primitive::kBox, 8, 8},           {"cone", Primitive::kCone, 8, 8},
      {"cylinder", Primitive::kCylinder, 8, 8}, {"pyramid", Primitive::kPyramid, 4, 8},
      {"sphere", Primitive::kSphere, 8, 8},     {"torus", Primitive::kTorus, 4, 8},
  };
  return spec;
}

Mesh MakePrimitive(Primitive primitive) {
  switch (primitive) {
    case Primitive::kBox:
      return MakeBox(1.0, 1.0, 1.0);
    case Primitive::kSphere:
      return MakeUvSphere(12, 16);
    case Primitive::kCylinder:
      return MakeCylinder(0.45, 1.6, 16);
    case Primitive::kCone:
      return MakeCone(0.6, 1.4, 16);
    case Primitive::kPyramid:
      return MakePyramid(1.2, 1.0);
    case Primitive::kTorus:
      return MakeTorus(0.7, 0.25, 20, 10);
  }
  return MakeBox(1.0, 1.0, 1.0);
}

Image SketchFromMesh(const Mesh& mesh, double azimuth_deg, double elevation_deg, int size, int stroke_radius) {
  CameraRig rig = MakeRig(1, elevation_deg, size, Projection::kOrthographic);
  const Image render = RenderView(NormalizeToUnitSphere(mesh), rig, azimuth_deg);
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < size && y < size && render.at(x, y, 0) != 255;
  };
  Image sketch(size, size, 255);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (!inside(x, y)) continue;
      const bool boundary = !inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1);
      if (!boundary) continue;
      for (int dy = -stroke_radius; dy <= stroke_radius; ++dy) {
        for (int dx = -stroke_radius; dx <= stroke_radius; ++dx) {
          const int sx = x + dx;
          const int sy = y + dy;
          if (sx >= 0 && sy >= 0 && sx < size && sy < size) sketch.Set(sx, sy, 0, 0, 0);
        }
      }
    }
  }
  return sketch;
}

void GenerateSyntheticDataset(const std::filesystem::path& root, const SyntheticSpec& spec) {
  const auto base = root / spec.dataset_name;
  for (const auto& category : spec.categories) {
    std::mt19937_64 rng(HashCombine(spec.seed, Fnv1a64(category.name)));
    std::uniform_real_distribution<double> jitter(0.8, 1.25);
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    std::uniform_real_distribution<double> elevation(5.0, 35.0);
    const Mesh prototype = MakePrimitive(category.primitive);
    for (int i = 0; i < category.shape_count; ++i) {
      const Eigen::Vector3d scale(jitter(rng), jitter(rng), jitter(rng));
      const Mesh mesh = Transform(prototype, scale, angle(rng));
      WriteObj(base / "shapes" / category.name / fmt::format("{}_{:03d}.obj", category.name, i), mesh);
    }
    for (int i = 0; i < category.sketch_count; ++i) {
      const Eigen::Vector3d scale(jitter(rng), jitter(rng), jitter(rng));
      const Mesh mesh = Transform(prototype, scale, angle(rng));
      const Image sketch = SketchFromMesh(mesh, angle(rng), elevation(rng), spec.sketch_size);
      WritePng(base / "sketches" / category.name / fmt::format("{}_s{:03d}.png", category.name, i), sketch);
    }
  }
}

}  // namespace sbsr::dataset
