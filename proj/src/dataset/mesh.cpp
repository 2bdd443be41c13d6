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

#include "sbsr/dataset/mesh.hpp"

#include <fmt/core.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "sbsr/core/error.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::dataset {

namespace fs = std::filesystem;

namespace {

void AddPolygon(Mesh& mesh, const std::vector<int>& poly, const fs::path& path) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (int idx : poly) {
    if (idx < 0 || idx >= n) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": face index out of range");
  }
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
}

Mesh LoadObj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMeshLoadFailure, "cannot open " + path.string());
  Mesh mesh;
  std::vector<std::vector<int>> polys;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const int idx = std::stoi(tok.substr(0, tok.find('/')));
        // Negative indices are relative to the current vertex count.
        poly.push_back(idx < 0 ? static_cast<int>(mesh.vertices.size()) + idx : idx - 1);
      }
      if (poly.size() < 3) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": face with < 3 vertices");
      polys.push_back(std::move(poly));
    }
  }
  for (const auto& p : polys) AddPolygon(mesh, p, path);
  return mesh;
}

Mesh LoadOff(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMeshLoadFailure, "cannot open " + path.string());
  std::stringstream body;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    body << (hash == std::string::npos ? line : line.substr(0, hash)) << '\n';
  }
  std::string header;
  body >> header;
  if (header.rfind("OFF", 0) != 0) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": missing OFF header");
  long nv = 0, nf = 0, ne = 0;
  // Some archives glue the vertex count onto the header ("OFF1234 ...").
  if (header.size() > 3) {
    nv = std::stol(header.substr(3));
    body >> nf >> ne;
  } else {
    body >> nv >> nf >> ne;
  }
  if (!body || nv < 0 || nf < 0) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": bad OFF counts");
  Mesh mesh;
  mesh.vertices.resize(static_cast<std::size_t>(nv));
  for (auto& v : mesh.vertices) {
    if (!(body >> v.x() >> v.y() >> v.z())) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": truncated vertices");
  }
  for (long f = 0; f < nf; ++f) {
    int k = 0;
    if (!(body >> k) || k < 3) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": bad face");
    std::vector<int> poly(static_cast<std::size_t>(k));
    for (int& idx : poly) {
      if (!(body >> idx)) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": truncated faces");
    }
    AddPolygon(mesh, poly, path);
  }
  return mesh;
}

}  // namespace

Mesh LoadMesh(const fs::path& path) {
  const std::string ext = path.extension().string();
  Mesh mesh;
  try {
    if (ext == ".obj" || ext == ".OBJ") {
      mesh = LoadObj(path);
    } else if (ext == ".off" || ext == ".OFF") {
      mesh = LoadOff(path);
    } else {
      throw Error(ErrorCode::kMeshLoadFailure, "unsupported mesh format " + path.string());
    }
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": malformed number");
  } catch (const std::out_of_range&) {
    throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": number out of range");
  }
  if (mesh.vertices.empty() || mesh.faces.empty()) throw Error(ErrorCode::kMeshLoadFailure, path.string() + ": empty mesh");
  return mesh;
}

void WriteObj(const fs::path& path, const Mesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) out += fmt::format("v {:.9g} {:.9g} {:.9g}\n", v.x(), v.y(), v.z());
  for (const auto& f : mesh.faces) out += fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
  WriteFileAtomic(path, out);
}

Mesh NormalizeToUnitSphere(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::kDegenerateMesh, "mesh has no vertices");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : mesh.vertices) centroid += v;
  centroid /= static_cast<double>(mesh.vertices.size());
  double radius = 0.0;
  for (const auto& v : mesh.vertices) radius = std::max(radius, (v - centroid).norm());
  if (!(radius > 1e-12) || !std::isfinite(radius)) throw Error(ErrorCode::kDegenerateMesh, "mesh has zero extent");
  Mesh out = mesh;
  for (auto& v : out.vertices) v = (v - centroid) / radius;
  return out;
}

Mesh MakeBox(double sx, double sy, double sz) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1 ? 0.5 : -0.5) * sx, (i & 2 ? 0.5 : -0.5) * sy, (i & 4 ? 0.5 : -0.5) * sz);
  }
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

Mesh MakeUvSphere(int rings, int segments) {
  Mesh m;
  const double pi = std::numbers::pi;
  for (int r = 0; r <= rings; ++r) {
    const double phi = pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * pi * s / segments;
      m.vertices.emplace_back(std::sin(phi) * std::cos(theta), std::cos(phi), std::sin(phi) * std::sin(theta));
    }
  }
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = r * segments + s;
      const int b = r * segments + (s + 1) % segments;
      const int c = (r + 1) * segments + s;
      const int d = (r + 1) * segments + (s + 1) % segments;
      m.faces.push_back({a, c, b});
      m.faces.push_back({b, c, d});
    }
  }
  return m;
}

namespace {

// Ring-based solid of revolution around +y; `profile` lists (radius, y) pairs.
Mesh Revolve(const std::vector<std::pair<double, double>>& profile, int segments) {
  Mesh m;
  const double pi = std::numbers::pi;
  for (const auto& [radius, y] : profile) {
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * pi * s / segments;
      m.vertices.emplace_back(radius * std::cos(theta), y, radius * std::sin(theta));
    }
  }
  const int rings = static_cast<int>(profile.size());
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = r * segments + s;
      const int b = r * segments + (s + 1) % segments;
      const int c = (r + 1) * segments + s;
      const int d = (r + 1) * segments + (s + 1) % segments;
      m.faces.push_back({a, b, c});
      m.faces.push_back({b, d, c});
    }
  }
  // Caps.
  const int bottom = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, profile.front().second, 0.0);
  const int top = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, profile.back().second, 0.0);
  const int last = (rings - 1) * segments;
  for (int s = 0; s < segments; ++s) {
    m.faces.push_back({bottom, (s + 1) % segments, s});
    m.faces.push_back({top, last + s, last + (s + 1) % segments});
  }
  return m;
}

}  // namespace

Mesh MakeCylinder(double radius, double height, int segments) {
  return Revolve({{radius, -0.5 * height}, {radius, 0.5 * height}}, segments);
}

Mesh MakeCone(double radius, double height, int segments) {
  return Revolve({{radius, -0.5 * height}, {1e-6, 0.5 * height}}, segments);
}

Mesh MakeTorus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
  Mesh m;
  const double pi = std::numbers::pi;
  for (int i = 0; i < major_segments; ++i) {
    const double u = 2.0 * pi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double v = 2.0 * pi * j / minor_segments;
      const double r = major_radius + minor_radius * std::cos(v);
      m.vertices.emplace_back(r * std::cos(u), minor_radius * std::sin(v), r * std::sin(u));
    }
  }
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      const int a = i * minor_segments + j;
      const int b = ((i + 1) % major_segments) * minor_segments + j;
      const int c = i * minor_segments + (j + 1) % minor_segments;
      const int d = ((i + 1) % major_segments) * minor_segments + (j + 1) % minor_segments;
      m.faces.push_back({a, b, c});
      m.faces.push_back({b, d, c});
    }
  }
  return m;
}

Mesh MakePyramid(double base, double height) {
  Mesh m;
  const double h = 0.5 * base;
  m.vertices = {{-h, -0.5 * height, -h}, {h, -0.5 * height, -h}, {h, -0.5 * height, h}, {-h, -0.5 * height, h},
                {0.0, 0.5 * height, 0.0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 4, 1}, {1, 4, 2}, {2, 4, 3}, {3, 4, 0}};
  return m;
}

Mesh Transform(const Mesh& mesh, const Eigen::Vector3d& scale, double yaw_deg) {
  const double a = yaw_deg * std::numbers::pi / 180.0;
  Eigen::Matrix3d rot;
  rot << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  Mesh out = mesh;
  for (auto& v : out.vertices) v = rot * v.cwiseProduct(scale);
  return out;
}

}  // namespace sbsr::dataset
