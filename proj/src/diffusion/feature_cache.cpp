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

#include "sbsr/diffusion/feature_cache.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <cstring>
#include <sstream>

#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::diffusion {

std::string FeatureCacheKey::FileName() const {
  return fmt::format("{}-t{}-{}.feat", HexDigest(Fnv1a64(item_id)), timestep, HexDigest(conditioning_hash));
}

FeatureCache::FeatureCache(std::filesystem::path root, CacheDtype dtype) : root_(std::move(root)), dtype_(dtype) {}

std::string SerializeFeatures(const MultiScaleFeatures& features, CacheDtype dtype) {
  std::ostringstream out(std::ios::binary);
  out.write(FeatureCache::kMagic, sizeof(FeatureCache::kMagic));
  WritePod(out, FeatureCache::kVersion);
  for (const auto& m : features.maps) {
    WritePod(out, static_cast<std::uint32_t>(m.height));
    WritePod(out, static_cast<std::uint32_t>(m.width));
    WritePod(out, static_cast<std::uint32_t>(m.channels()));
  }
  WritePod(out, static_cast<std::uint32_t>(dtype));
  for (const auto& m : features.maps) {
    const Matrix& v = m.data.value();
    for (Index i = 0; i < v.size(); ++i) {
      if (dtype == CacheDtype::kFloat32) {
        WritePod(out, static_cast<float>(v.data()[i]));
      } else {
        WritePod(out, v.data()[i]);
      }
    }
  }
  return out.str();
}

MultiScaleFeatures DeserializeFeatures(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  char magic[sizeof(FeatureCache::kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, FeatureCache::kMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kParseError, "feature blob has a bad magic");
  }
  if (ReadPod<std::uint32_t>(in) != FeatureCache::kVersion) throw Error(ErrorCode::kParseError, "feature blob version");
  std::array<std::array<std::uint32_t, 3>, kHookCount> shapes{};
  for (auto& s : shapes) {
    for (auto& v : s) v = ReadPod<std::uint32_t>(in);
  }
  const auto dtype = static_cast<CacheDtype>(ReadPod<std::uint32_t>(in));
  if (dtype != CacheDtype::kFloat32 && dtype != CacheDtype::kFloat64) {
    throw Error(ErrorCode::kParseError, "feature blob dtype");
  }
  MultiScaleFeatures f;
  for (int k = 0; k < kHookCount; ++k) {
    const auto& s = shapes[static_cast<std::size_t>(k)];
    Matrix v(static_cast<Index>(s[0]) * s[1], static_cast<Index>(s[2]));
    for (Index i = 0; i < v.size(); ++i) {
      v.data()[i] = dtype == CacheDtype::kFloat32 ? static_cast<double>(ReadPod<float>(in)) : ReadPod<double>(in);
    }
    f.maps[static_cast<std::size_t>(k)] =
        SpatialMap{static_cast<int>(s[0]), static_cast<int>(s[1]), ag::Var::Constant(std::move(v))};
  }
  return f;
}

std::optional<MultiScaleFeatures> FeatureCache::Load(const FeatureCacheKey& key) const {
  const auto path = root_ / key.FileName();
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return DeserializeFeatures(ReadFile(path));
  } catch (const Error& e) {
    spdlog::warn("ignoring unreadable feature cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void FeatureCache::Store(const FeatureCacheKey& key, const MultiScaleFeatures& features) const {
  std::filesystem::create_directories(root_);
  WriteFileAtomic(root_ / key.FileName(), SerializeFeatures(features, dtype_));
}

}  // namespace sbsr::diffusion
