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
#include <vector>

#include "sbsr/core/image.hpp"
#include "sbsr/dataset/manifest.hpp"
#include "sbsr/dataset/mesh.hpp"

namespace sbsr::dataset {

enum class Projection { kPerspective, kOrthographic };

struct CameraRig {
  int view_count = 12;
  double elevation_deg = 20.0;
  std::vector<double> azimuths_deg;
  int image_size = 224;
  Projection projection = Projection::kPerspective;

  void Validate() const;
};

// Orthographic rigs map [-kOrthoHalfExtent, kOrthoHalfExtent] of the camera
// plane onto the image; perspective rigs sit at kCameraDistance with
// kPerspectiveFovDeg, which keeps the unit sphere inside the frame.
inline constexpr double kOrthoHalfExtent = 1.1;
inline constexpr double kCameraDistance = 2.5;
inline constexpr double kPerspectiveFovDeg = 50.0;

// `view_count` azimuths evenly spaced from 0.
CameraRig MakeRig(int view_count, double elevation_deg, int image_size, Projection projection = Projection::kPerspective);
CameraRig DefaultRig();

// Renders an already-normalized mesh: flat two-sided Lambert shading with a
// headlight, grey on white. Pure function of its arguments.
Image RenderView(const Mesh& normalized, const CameraRig& rig, double azimuth_deg);

// Normalizes to the unit bounding sphere, then renders every rig azimuth.
std::vector<Image> RenderViews(const Mesh& mesh, const CameraRig& rig);
std::vector<Image> RenderViews(const ShapeRecord& shape, const CameraRig& rig);

// Renders every shape and records view paths as
// `<out_dir>/<shape_id with ':' -> '_'>/view_NN.png`.
void RenderManifest(DatasetManifest& manifest, const CameraRig& rig, const std::filesystem::path& out_dir);

}  // namespace sbsr::dataset
