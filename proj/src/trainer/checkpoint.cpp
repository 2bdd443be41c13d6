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

#include "sbsr/trainer/checkpoint.hpp"

#include <cereal/archives/binary.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>
#include <fmt/core.h>

#include <cstring>
#include <sstream>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::trainer {

namespace {

struct Blob {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(rows, cols, data);
  }
};

Blob ToBlob(const Matrix& m) { return {m.rows(), m.cols(), std::vector<double>(m.data(), m.data() + m.size())}; }

Matrix FromBlob(const Blob& b) {
  if (b.rows < 0 || b.cols < 0 || static_cast<std::size_t>(b.rows * b.cols) != b.data.size()) {
    throw Error(ErrorCode::kCheckpointCorrupt, "blob size disagrees with its shape");
  }
  Matrix m(b.rows, b.cols);
  std::copy(b.data.begin(), b.data.end(), m.data());
  return m;
}

}  // namespace

CheckpointBundle Capture(const ModelParams& params, const AdamW& optimizer, std::int64_t step,
                         const TrainConfig& config, std::uint64_t manifest_hash, std::uint64_t backbone_checksum) {
  CheckpointBundle b;
  b.step = step;
  b.optimizer_steps = optimizer.steps();
  for (const auto& p : params.Named()) b.params.emplace(p.name, p.var.value());
  b.moments = optimizer.moments();
  b.class_names = params.head.class_names;
  b.config_json = nlohmann::json(config).dump();
  b.manifest_hash = manifest_hash;
  b.backbone_checksum = backbone_checksum;
  return b;
}

void RestoreParams(const CheckpointBundle& bundle, ModelParams& params) {
  for (const auto& p : params.Named()) {
    auto it = bundle.params.find(p.name);
    if (it == bundle.params.end()) throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint lacks " + p.name);
    if (it->second.rows() != p.var.rows() || it->second.cols() != p.var.cols()) {
      throw Error(ErrorCode::kCheckpointCorrupt, fmt::format("checkpoint {} has shape {}x{}, model expects {}x{}",
                                                             p.name, it->second.rows(), it->second.cols(),
                                                             p.var.rows(), p.var.cols()));
    }
    ag::Var v = p.var;
    v.mutable_value() = it->second;
  }
}

ModelParams ParamsFromCheckpoint(const CheckpointBundle& bundle, const Embedder& embedder) {
  ModelParams params = embedder.InitParams(bundle.class_names);
  RestoreParams(bundle, params);
  return params;
}

std::uint64_t CheckpointHash(const CheckpointBundle& bundle) {
  std::uint64_t h = Fnv1a64(bundle.config_json);
  for (const auto& [name, m] : bundle.params) h = HashCombine(h, MatrixChecksum(m, Fnv1a64(name)));
  return h;
}

LoadedModel LoadModel(const CheckpointBundle& bundle, const std::string& backbone_override) {
  LoadedModel m;
  try {
    m.config = nlohmann::json::parse(bundle.config_json).get<TrainConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCheckpointCorrupt, fmt::format("checkpoint config: {}", e.what()));
  }
  if (!backbone_override.empty()) m.config.backbone = backbone_override;
  m.assets = MakeAssets(m.config);
  if (m.assets.backbone->WeightChecksum() != bundle.backbone_checksum) {
    throw Error(ErrorCode::kIncompatibleAssets, "backbone weights differ from the ones the checkpoint was trained with");
  }
  m.embedder = std::make_unique<Embedder>(m.config, *m.assets.backbone, *m.assets.encoder, *m.assets.captioner);
  m.params = ParamsFromCheckpoint(bundle, *m.embedder);
  return m;
}

std::string CheckpointFileName(std::int64_t step) { return fmt::format("ckpt-{}.bin", step); }

void SaveCheckpoint(const std::filesystem::path& path, const CheckpointBundle& bundle) {
  std::ostringstream out(std::ios::binary);
  {
    cereal::BinaryOutputArchive ar(out);
    std::map<std::string, Blob> params;
    for (const auto& [k, v] : bundle.params) params.emplace(k, ToBlob(v));
    std::map<std::string, std::pair<Blob, Blob>> moments;
    for (const auto& [k, v] : bundle.moments) moments.emplace(k, std::make_pair(ToBlob(v.m), ToBlob(v.v)));
    ar(std::string("sbsr-checkpoint"), bundle.version, bundle.step, bundle.optimizer_steps, params, moments,
       bundle.class_names, bundle.config_json, bundle.manifest_hash, bundle.backbone_checksum);
  }
  std::string bytes = out.str();
  const std::uint64_t digest = Fnv1a64(bytes);
  bytes.append(reinterpret_cast<const char*>(&digest), sizeof(digest));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  WriteFileAtomic(path, bytes);
}

CheckpointBundle LoadCheckpoint(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  if (bytes.size() < sizeof(std::uint64_t)) throw Error(ErrorCode::kCheckpointCorrupt, path.string() + " is truncated");
  const std::string_view payload(bytes.data(), bytes.size() - sizeof(std::uint64_t));
  std::uint64_t digest = 0;
  std::memcpy(&digest, bytes.data() + payload.size(), sizeof(digest));
  if (digest != Fnv1a64(payload)) throw Error(ErrorCode::kCheckpointCorrupt, path.string() + " failed its digest");

  CheckpointBundle b;
  try {
    std::istringstream in(std::string(payload), std::ios::binary);
    cereal::BinaryInputArchive ar(in);
    std::string magic;
    std::map<std::string, Blob> params;
    std::map<std::string, std::pair<Blob, Blob>> moments;
    ar(magic, b.version);
    if (magic != "sbsr-checkpoint" || b.version != kCheckpointVersion) {
      throw Error(ErrorCode::kCheckpointCorrupt, path.string() + " has an unknown format or version");
    }
    ar(b.step, b.optimizer_steps, params, moments, b.class_names, b.config_json, b.manifest_hash,
       b.backbone_checksum);
    for (const auto& [k, v] : params) b.params.emplace(k, FromBlob(v));
    for (const auto& [k, v] : moments) b.moments.emplace(k, Moments{FromBlob(v.first), FromBlob(v.second)});
  } catch (const cereal::Exception& e) {
    throw Error(ErrorCode::kCheckpointCorrupt, fmt::format("{}: {}", path.string(), e.what()));
  }
  return b;
}

}  // namespace sbsr::trainer
