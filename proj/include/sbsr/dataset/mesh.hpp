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

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <vector>

namespace sbsr::dataset {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;  // polygons are fan-triangulated on load
};

// OBJ (v/f records; texture and normal indices ignored) or OFF.
Mesh LoadMesh(const std::filesystem::path& path);
void WriteObj(const std::filesystem::path& path, const Mesh& mesh);

// Translates the vertex centroid to the origin and scales so the farthest
// vertex lies on the unit sphere. DegenerateMesh when the extent is zero.
Mesh NormalizeToUnitSphere(const Mesh& mesh);

// Procedural primitives, centered at the origin.
Mesh MakeBox(double sx, double sy, double sz);
Mesh MakeUvSphere(int rings, int segments);
Mesh MakeCylinder(double radius, double height, int segments);
Mesh MakeCone(double radius, double height, int segments);
Mesh MakeTorus(double major_radius, double minor_radius, int major_segments, int minor_segments);
Mesh MakePyramid(double base, double height);

// Per-axis scale, then rotation about +y by `yaw_deg`.
Mesh Transform(const Mesh& mesh, const Eigen::Vector3d& scale, double yaw_deg);

}  // namespace sbsr::dataset
