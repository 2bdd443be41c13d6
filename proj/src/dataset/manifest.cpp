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

#include "sbsr/dataset/manifest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

struct RawItem {
  std::string stem;
  std::string category;
  fs::path path;
  Role role = Role::kTrain;
};

bool HasExtension(const fs::path& p, std::initializer_list<std::string_view> exts) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

std::vector<fs::path> SortedFiles(const fs::path& dir, std::initializer_list<std::string_view> exts) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && HasExtension(entry.path(), exts)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> SortedSubdirs(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A stem that occurs in more than one category is prefixed with its category;
// a stem repeated inside one category is a genuine duplicate.
std::vector<std::string> AssignIds(const std::vector<RawItem>& items, std::string_view kind) {
  std::map<std::string, std::set<std::string>> categories_by_stem;
  std::set<std::pair<std::string, std::string>> seen;
  for (const RawItem& item : items) {
    if (!seen.emplace(item.category, item.stem).second) {
      throw Error(ErrorCode::kDuplicateId,
                  fmt::format("{} id '{}' appears twice in category '{}'", kind, item.stem, item.category));
    }
    categories_by_stem[item.stem].insert(item.category);
  }
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const RawItem& item : items) {
    ids.push_back(categories_by_stem[item.stem].size() > 1 ? item.category + ":" + item.stem : item.stem);
  }
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw Error(ErrorCode::kDuplicateId, std::string(kind) + " ids collide after prefixing");
  return ids;
}

json ShapeToJson(const ShapeRecord& s) {
  return json{{"kind", "shape"},      {"id", s.shape_id},       {"category", s.category}, {"uri", s.mesh_uri},
              {"views", s.view_uris}, {"view_scores", s.view_scores}, {"caption", s.caption}};
}

json SketchToJson(const SketchRecord& s) {
  return json{{"kind", "sketch"},
              {"id", s.sketch_id},
              {"category", s.category},
              {"uri", s.image_uri},
              {"role", std::string(ToString(s.role))},
              {"caption", s.caption}};
}

}  // namespace

std::string_view ToString(Role role) { return role == Role::kTrain ? "train" : "test"; }

Role ParseRole(std::string_view text) {
  if (text == "train") return Role::kTrain;
  if (text == "test") return Role::kTest;
  throw Error(ErrorCode::kParseError, fmt::format("unknown role '{}'", text));
}

const ShapeRecord* DatasetManifest::FindShape(std::string_view id) const {
  for (const auto& s : shapes) {
    if (s.shape_id == id) return &s;
  }
  return nullptr;
}

const SketchRecord* DatasetManifest::FindSketch(std::string_view id) const {
  for (const auto& s : sketches) {
    if (s.sketch_id == id) return &s;
  }
  return nullptr;
}

std::size_t DatasetManifest::ShapeCount(std::string_view category) const {
  return static_cast<std::size_t>(
      std::count_if(shapes.begin(), shapes.end(), [&](const ShapeRecord& s) { return s.category == category; }));
}

DatasetManifest LoadManifest(const fs::path& root, std::string_view dataset_name) {
  const fs::path base = root / std::string(dataset_name);
  const fs::path sketch_dir = base / "sketches";
  const fs::path shape_dir = base / "shapes";
  if (!fs::is_directory(sketch_dir) && !fs::is_directory(shape_dir)) {
    throw Error(ErrorCode::kMissingDirectory,
                fmt::format("expected {} and/or {}", sketch_dir.string(), shape_dir.string()));
  }

  std::set<std::string> category_set;
  std::vector<RawItem> raw_shapes;
  for (const std::string& category : SortedSubdirs(shape_dir)) {
    const auto files = SortedFiles(shape_dir / category, {".obj", ".off"});
    if (files.empty()) throw Error(ErrorCode::kEmptyCategory, "no shapes in " + (shape_dir / category).string());
    category_set.insert(category);
    for (const auto& f : files) raw_shapes.push_back({f.stem().string(), category, fs::absolute(f), Role::kTrain});
  }

  std::vector<RawItem> raw_sketches;
  for (const std::string& category : SortedSubdirs(sketch_dir)) {
    const fs::path cdir = sketch_dir / category;
    std::size_t before = raw_sketches.size();
    for (const auto& f : SortedFiles(cdir, {".png"})) {
      raw_sketches.push_back({f.stem().string(), category, fs::absolute(f), Role::kTrain});
    }
    for (const auto& f : SortedFiles(cdir / "train", {".png"})) {
      raw_sketches.push_back({f.stem().string(), category, fs::absolute(f), Role::kTrain});
    }
    for (const auto& f : SortedFiles(cdir / "test", {".png"})) {
      raw_sketches.push_back({f.stem().string(), category, fs::absolute(f), Role::kTest});
    }
    if (raw_sketches.size() == before) throw Error(ErrorCode::kEmptyCategory, "no sketches in " + cdir.string());
    category_set.insert(category);
  }
  if (category_set.empty()) throw Error(ErrorCode::kMissingDirectory, "no category folders under " + base.string());

  DatasetManifest manifest;
  manifest.dataset_name = std::string(dataset_name);
  manifest.categories.assign(category_set.begin(), category_set.end());

  const auto shape_ids = AssignIds(raw_shapes, "shape");
  for (std::size_t i = 0; i < raw_shapes.size(); ++i) {
    manifest.shapes.push_back({shape_ids[i], raw_shapes[i].category, raw_shapes[i].path.string(), {}, {}, {}});
  }
  const auto sketch_ids = AssignIds(raw_sketches, "sketch");
  for (std::size_t i = 0; i < raw_sketches.size(); ++i) {
    manifest.sketches.push_back(
        {sketch_ids[i], raw_sketches[i].category, raw_sketches[i].path.string(), raw_sketches[i].role, {}});
  }
  spdlog::info("loaded {}: {} categories, {} shapes, {} sketches", manifest.dataset_name, manifest.categories.size(),
               manifest.shapes.size(), manifest.sketches.size());
  return manifest;
}

void ValidateManifest(const DatasetManifest& manifest) {
  const std::set<std::string> categories(manifest.categories.begin(), manifest.categories.end());
  std::set<std::string> ids;
  for (const auto& s : manifest.shapes) {
    if (s.category.empty() || !categories.contains(s.category)) {
      throw Error(ErrorCode::kParseError, "shape " + s.shape_id + " has unlisted category '" + s.category + "'");
    }
    if (!ids.insert("shape/" + s.shape_id).second) throw Error(ErrorCode::kDuplicateId, s.shape_id);
  }
  for (const auto& s : manifest.sketches) {
    if (s.category.empty() || !categories.contains(s.category)) {
      throw Error(ErrorCode::kParseError, "sketch " + s.sketch_id + " has unlisted category '" + s.category + "'");
    }
    if (!ids.insert("sketch/" + s.sketch_id).second) throw Error(ErrorCode::kDuplicateId, s.sketch_id);
  }
}

void WriteManifestFile(const fs::path& path, const DatasetManifest& manifest) {
  std::ostringstream out;
  out << json{{"kind", "manifest"},
              {"version", kManifestVersion},
              {"dataset", manifest.dataset_name},
              {"categories", manifest.categories}}
             .dump()
      << '\n';
  for (const auto& s : manifest.shapes) out << ShapeToJson(s).dump() << '\n';
  for (const auto& s : manifest.sketches) out << SketchToJson(s).dump() << '\n';
  WriteFileAtomic(path, out.str());
}

DatasetManifest ReadManifestFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path.string());
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string kind = j.at("kind");
      if (kind == "manifest") {
        if (j.at("version").get<int>() != kManifestVersion) throw Error(ErrorCode::kParseError, "manifest version");
        manifest.dataset_name = j.at("dataset");
        manifest.categories = j.at("categories").get<std::vector<std::string>>();
        have_header = true;
      } else if (kind == "shape") {
        ShapeRecord s;
        s.shape_id = j.at("id");
        s.category = j.at("category");
        s.mesh_uri = j.at("uri");
        s.view_uris = j.value("views", std::vector<std::string>{});
        s.view_scores = j.value("view_scores", std::vector<double>{});
        s.caption = j.value("caption", std::string{});
        manifest.shapes.push_back(std::move(s));
      } else if (kind == "sketch") {
        SketchRecord s;
        s.sketch_id = j.at("id");
        s.category = j.at("category");
        s.image_uri = j.at("uri");
        s.role = ParseRole(j.value("role", std::string("train")));
        s.caption = j.value("caption", std::string{});
        manifest.sketches.push_back(std::move(s));
      } else {
        throw Error(ErrorCode::kParseError, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (!have_header) throw Error(ErrorCode::kParseError, "manifest header missing in " + path.string());
  ValidateManifest(manifest);
  return manifest;
}

std::uint64_t ManifestHash(const DatasetManifest& manifest) {
  std::uint64_t h = Fnv1a64(manifest.dataset_name);
  for (const auto& c : manifest.categories) h = Fnv1a64(c, HashCombine(h, 1));
  for (const auto& s : manifest.shapes) {
    h = Fnv1a64(s.shape_id, HashCombine(h, 2));
    h = Fnv1a64(s.category, h);
  }
  for (const auto& s : manifest.sketches) {
    h = Fnv1a64(s.sketch_id, HashCombine(h, 3));
    h = Fnv1a64(s.category, h);
    h = Fnv1a64(ToString(s.role), h);
  }
  return h;
}

}  // namespace sbsr::dataset
