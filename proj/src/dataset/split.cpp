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

#include "sbsr/dataset/split.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <nlohmann/json.hpp>

#include "sbsr/core/error.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::dataset {

namespace {

constexpr std::array<OfficialCounts, 2> kOfficial = {{
    {"shrec13", 90, 1258, 7200, 79, 23},
    {"shrec14", 171, 8987, 13680, 151, 38},
}};

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view ToString(Protocol p) { return p == Protocol::kSplitI ? "split1" : "split2"; }

Protocol ParseProtocol(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "split1" || t == "spliti" || t == "split-i") return Protocol::kSplitI;
  if (t == "split2" || t == "splitii" || t == "split-ii") return Protocol::kSplitII;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown split protocol '{}'", text));
}

std::optional<OfficialCounts> FindOfficialCounts(std::string_view dataset_name) {
  const std::string name = Lower(dataset_name);
  for (const auto& c : kOfficial) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

bool IsOfficialRelease(const DatasetManifest& manifest) {
  const auto counts = FindOfficialCounts(manifest.dataset_name);
  return counts && manifest.categories.size() == counts->categories && manifest.shapes.size() == counts->shapes &&
         manifest.sketches.size() == counts->sketches;
}

SplitSpec MakeSplit(const DatasetManifest& manifest, Protocol protocol, const SplitOptions& options) {
  SplitSpec split;
  split.protocol = protocol;
  const std::size_t n = manifest.categories.size();
  const bool official = IsOfficialRelease(manifest);
  const OfficialCounts reference = FindOfficialCounts(manifest.dataset_name).value_or(kOfficial[0]);

  std::vector<std::string> sorted = manifest.categories;
  std::sort(sorted.begin(), sorted.end());

  if (protocol == Protocol::kSplitI) {
    std::size_t seen_count;
    if (options.split1_unseen) {
      seen_count = n - std::min(n, *options.split1_unseen);
    } else if (official) {
      seen_count = reference.split1_seen;
    } else {
      const double fraction = static_cast<double>(reference.split1_seen) / static_cast<double>(reference.categories);
      seen_count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
      if (n >= 2) seen_count = std::clamp<std::size_t>(seen_count, 1, n - 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      (i < seen_count ? split.seen_categories : split.unseen_categories).insert(sorted[i]);
    }
  } else {
    for (const auto& c : sorted) {
      const bool scarce = manifest.ShapeCount(c) <= options.split2_threshold;
      (scarce ? split.unseen_categories : split.seen_categories).insert(c);
    }
  }

  if (official) {
    const bool ok = protocol == Protocol::kSplitI ? split.seen_categories.size() == reference.split1_seen
                                                  : split.unseen_categories.size() == reference.split2_unseen;
    if (!ok) {
      throw Error(ErrorCode::kCountMismatch,
                  fmt::format("{} {}: computed {} seen / {} unseen disagrees with the published partition",
                              manifest.dataset_name, ToString(protocol), split.seen_categories.size(),
                              split.unseen_categories.size()));
    }
  } else if (FindOfficialCounts(manifest.dataset_name)) {
    spdlog::warn("{} is a partial release ({} categories); {} applied without published-size check",
                 manifest.dataset_name, n, ToString(protocol));
  }
  return split;
}

void ApplyZeroShotRoles(DatasetManifest& manifest, const SplitSpec& split) {
  for (auto& s : manifest.sketches) {
    if (split.unseen_categories.contains(s.category)) s.role = Role::kTest;
  }
}

void WriteSplitFile(const std::filesystem::path& path, const SplitSpec& split) {
  nlohmann::json j{{"protocol", std::string(ToString(split.protocol))},
                   {"seen", split.seen_categories},
                   {"unseen", split.unseen_categories}};
  WriteFileAtomic(path, j.dump(2) + "\n");
}

SplitSpec ReadSplitFile(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(ReadFile(path));
    SplitSpec split;
    split.protocol = ParseProtocol(j.at("protocol").get<std::string>());
    split.seen_categories = j.at("seen").get<std::set<std::string>>();
    split.unseen_categories = j.at("unseen").get<std::set<std::string>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

}  // namespace sbsr::dataset
