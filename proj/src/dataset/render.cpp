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

#include "sbsr/dataset/render.hpp"

#include <Eigen/Geometry>
#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sbsr/core/error.hpp"

namespace sbsr::dataset {

namespace {

double Radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct Camera {
  Eigen::Vector3d eye;
  Eigen::Vector3d right;
  Eigen::Vector3d up;
  Eigen::Vector3d forward;
};

Camera LookAtOrigin(double azimuth_deg, double elevation_deg) {
  const double az = Radians(azimuth_deg);
  const double el = Radians(elevation_deg);
  Camera cam;
  cam.eye = kCameraDistance * Eigen::Vector3d(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
  cam.forward = (-cam.eye).normalized();
  Eigen::Vector3d world_up(0.0, 1.0, 0.0);
  if (std::abs(cam.forward.dot(world_up)) > 0.999) world_up = Eigen::Vector3d(0.0, 0.0, -1.0);
  cam.right = cam.forward.cross(world_up).normalized();
  cam.up = cam.right.cross(cam.forward);
  return cam;
}

struct Projected {
  double x;      // pixel coordinates
  double y;
  double depth;  // interpolation-ready: 1/z for perspective, z for ortho
};

std::string SafeName(std::string id) {
  std::replace(id.begin(), id.end(), ':', '_');
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

}  // namespace

void CameraRig::Validate() const {
  if (view_count <= 0) throw Error(ErrorCode::kInvalidArgument, "view_count must be positive");
  if (image_size <= 0) throw Error(ErrorCode::kInvalidArgument, "image_size must be positive");
  if (static_cast<int>(azimuths_deg.size()) != view_count) {
    throw Error(ErrorCode::kInvalidArgument, "azimuth count differs from view_count");
  }
  for (std::size_t i = 0; i < azimuths_deg.size(); ++i) {
    const double a = azimuths_deg[i];
    if (!(a >= 0.0 && a < 360.0)) throw Error(ErrorCode::kInvalidArgument, "azimuth outside [0, 360)");
    if (i > 0 && !(a > azimuths_deg[i - 1])) throw Error(ErrorCode::kInvalidArgument, "azimuths not strictly increasing");
  }
}

CameraRig MakeRig(int view_count, double elevation_deg, int image_size, Projection projection) {
  CameraRig rig;
  rig.view_count = view_count;
  rig.elevation_deg = elevation_deg;
  rig.image_size = image_size;
  rig.projection = projection;
  for (int i = 0; i < view_count; ++i) rig.azimuths_deg.push_back(360.0 * i / view_count);
  rig.Validate();
  return rig;
}

CameraRig DefaultRig() { return MakeRig(12, 20.0, 224, Projection::kPerspective); }

Image RenderView(const Mesh& normalized, const CameraRig& rig, double azimuth_deg) {
  const int size = rig.image_size;
  const Camera cam = LookAtOrigin(azimuth_deg, rig.elevation_deg);
  const double focal = 1.0 / std::tan(Radians(kPerspectiveFovDeg) / 2.0);
  const bool perspective = rig.projection == Projection::kPerspective;

  std::vector<Projected> proj(normalized.vertices.size());
  for (std::size_t i = 0; i < normalized.vertices.size(); ++i) {
    const Eigen::Vector3d d = normalized.vertices[i] - cam.eye;
    const double xv = d.dot(cam.right);
    const double yv = d.dot(cam.up);
    const double zv = d.dot(cam.forward);
    double nx, ny, depth;
    if (perspective) {
      nx = focal * xv / zv;
      ny = focal * yv / zv;
      depth = 1.0 / zv;
    } else {
      nx = xv / kOrthoHalfExtent;
      ny = yv / kOrthoHalfExtent;
      depth = -zv;  // larger is closer, matching 1/z
    }
    proj[i] = {(nx + 1.0) * 0.5 * size, (1.0 - ny) * 0.5 * size, depth};
  }

  Image image(size, size, 255);
  std::vector<double> zbuf(static_cast<std::size_t>(size) * size, -std::numeric_limits<double>::infinity());
  const Eigen::Vector3d light = (-cam.forward + 0.3 * cam.up + 0.2 * cam.right).normalized();

  for (const auto& f : normalized.faces) {
    const Projected& a = proj[static_cast<std::size_t>(f[0])];
    const Projected& b = proj[static_cast<std::size_t>(f[1])];
    const Projected& c = proj[static_cast<std::size_t>(f[2])];
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(area) < 1e-12) continue;
    const Eigen::Vector3d& p0 = normalized.vertices[static_cast<std::size_t>(f[0])];
    const Eigen::Vector3d normal = (normalized.vertices[static_cast<std::size_t>(f[1])] - p0)
                                       .cross(normalized.vertices[static_cast<std::size_t>(f[2])] - p0);
    const double nlen = normal.norm();
    const double lambert = nlen > 0.0 ? std::abs(normal.dot(light)) / nlen : 0.0;
    const auto shade = static_cast<std::uint8_t>(std::lround(255.0 * (0.2 + 0.65 * lambert)));

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        double w0 = ((b.x - px) * (c.y - py) - (b.y - py) * (c.x - px)) / area;
        double w1 = ((c.x - px) * (a.y - py) - (c.y - py) * (a.x - px)) / area;
        double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double depth = w0 * a.depth + w1 * b.depth + w2 * c.depth;
        double& z = zbuf[static_cast<std::size_t>(y) * size + x];
        if (depth > z) {
          z = depth;
          image.Set(x, y, shade, shade, shade);
        }
      }
    }
  }
  return image;
}

std::vector<Image> RenderViews(const Mesh& mesh, const CameraRig& rig) {
  rig.Validate();
  const Mesh normalized = NormalizeToUnitSphere(mesh);
  std::vector<Image> views;
  views.reserve(rig.azimuths_deg.size());
  for (double az : rig.azimuths_deg) views.push_back(RenderView(normalized, rig, az));
  return views;
}

std::vector<Image> RenderViews(const ShapeRecord& shape, const CameraRig& rig) {
  return RenderViews(LoadMesh(shape.mesh_uri), rig);
}

void RenderManifest(DatasetManifest& manifest, const CameraRig& rig, const std::filesystem::path& out_dir) {
  for (auto& shape : manifest.shapes) {
    const auto views = RenderViews(shape, rig);
    shape.view_uris.clear();
    shape.view_scores.clear();
    const auto dir = std::filesystem::absolute(out_dir / SafeName(shape.shape_id));
    for (std::size_t i = 0; i < views.size(); ++i) {
      const auto path = dir / fmt::format("view_{:02d}.png", i);
      WritePng(path, views[i]);
      shape.view_uris.push_back(path.string());
    }
  }
  spdlog::info("rendered {} shapes x {} views", manifest.shapes.size(), rig.view_count);
}

}  // namespace sbsr::dataset
