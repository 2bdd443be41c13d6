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

#include "sbsr/aggregation/embedding_store.hpp"

#include <fmt/core.h>

#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::aggregation {

std::string_view ToString(Modality modality) {
  switch (modality) {
    case Modality::kSketch: return "sketch";
    case Modality::kShape: return "shape";
    case Modality::kView: return "view";
  }
  return "shape";
}

Modality ParseModality(std::string_view text) {
  if (text == "sketch") return Modality::kSketch;
  if (text == "shape") return Modality::kShape;
  if (text == "view") return Modality::kView;
  throw Error(ErrorCode::kParseError, fmt::format("unknown modality '{}'", text));
}

void EmbeddingStore::Validate(double tol) const {
  if (labels.size() != ids.size() || static_cast<std::size_t>(vectors.rows()) != ids.size()) {
    throw Error(ErrorCode::kShapeMismatch, "embedding store ids, labels and rows disagree");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, "embedding id " + id);
  }
  for (Index i = 0; i < vectors.rows(); ++i) {
    if (std::abs(vectors.row(i).norm() - 1.0) > tol) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("embedding {} is not unit norm", ids[static_cast<std::size_t>(i)]));
    }
  }
}

void WriteEmbeddingStore(const std::filesystem::path& path, const EmbeddingStore& store) {
  store.Validate();
  std::ostringstream out(std::ios::binary);
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  WritePod(out, kEmbeddingVersion);
  WritePod(out, static_cast<std::uint64_t>(store.size()));
  WritePod(out, static_cast<std::uint32_t>(store.vectors.cols()));
  WritePod(out, store.manifest_hash);
  WritePod(out, store.checkpoint_hash);
  WriteString(out, std::string(ToString(store.modality)));
  for (std::size_t i = 0; i < store.size(); ++i) {
    WriteString(out, store.ids[i]);
    WriteString(out, store.labels[i]);
  }
  for (Index i = 0; i < store.vectors.size(); ++i) WritePod(out, static_cast<float>(store.vectors.data()[i]));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  WriteFileAtomic(path, out.str());

  nlohmann::json side = {{"version", kEmbeddingVersion},
                         {"modality", ToString(store.modality)},
                         {"count", store.size()},
                         {"dim", store.vectors.cols()},
                         {"manifest_hash", HexDigest(store.manifest_hash)},
                         {"checkpoint_hash", HexDigest(store.checkpoint_hash)},
                         {"items", nlohmann::json::array()}};
  for (std::size_t i = 0; i < store.size(); ++i) {
    side["items"].push_back({{"row", i}, {"id", store.ids[i]}, {"label", store.labels[i]}});
  }
  WriteFileAtomic(path.string() + ".json", side.dump(2) + "\n");
}

EmbeddingStore ReadEmbeddingStore(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path), std::ios::binary);
  char magic[sizeof(kEmbeddingMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kEmbeddingMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kParseError, path.string() + " is not an embedding store");
  }
  if (ReadPod<std::uint32_t>(in) != kEmbeddingVersion) throw Error(ErrorCode::kParseError, "embedding store version");
  const auto count = ReadPod<std::uint64_t>(in);
  const auto dim = ReadPod<std::uint32_t>(in);
  EmbeddingStore store;
  store.manifest_hash = ReadPod<std::uint64_t>(in);
  store.checkpoint_hash = ReadPod<std::uint64_t>(in);
  store.modality = ParseModality(ReadString(in));
  for (std::uint64_t i = 0; i < count; ++i) {
    store.ids.push_back(ReadString(in));
    store.labels.push_back(ReadString(in));
  }
  store.vectors.resize(static_cast<Index>(count), dim);
  for (Index i = 0; i < store.vectors.size(); ++i) store.vectors.data()[i] = ReadPod<float>(in);
  return store;
}

}  // namespace sbsr::aggregation
