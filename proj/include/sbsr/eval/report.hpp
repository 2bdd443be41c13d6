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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsr/core/image.hpp"
#include "sbsr/eval/evaluate.hpp"

namespace sbsr::eval {

inline constexpr int kReportSchemaVersion = 1;

// report.json: metrics plus free-form provenance (checkpoint, manifest, split).
struct ReportFile {
  int schema_version = kReportSchemaVersion;
  MetricsReport metrics;
  nlohmann::json provenance = nlohmann::json::object();

  friend bool operator==(const ReportFile&, const ReportFile&) = default;
};

struct RankedEntry {
  std::string id;
  std::string label;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

// One query's full ranking with labels resolved, as stored in rankings.json.
struct RankingRecord {
  std::string query_id;
  std::string query_label;
  std::vector<RankedEntry> entries;

  friend bool operator==(const RankingRecord&, const RankingRecord&) = default;
};

std::vector<RankingRecord> ToRecords(const Evaluation& evaluation);

void to_json(nlohmann::json& j, const ReportFile& r);
void from_json(const nlohmann::json& j, ReportFile& r);
void to_json(nlohmann::json& j, const RankingRecord& r);
void from_json(const nlohmann::json& j, RankingRecord& r);

// ParseError on an unknown schema version.
void WriteReport(const std::filesystem::path& path, const ReportFile& report);
ReportFile ReadReport(const std::filesystem::path& path);
void WriteRankings(const std::filesystem::path& path, const std::vector<RankingRecord>& rankings);
std::vector<RankingRecord> ReadRankings(const std::filesystem::path& path);

// Writes report.json and rankings.json into `dir`.
void EmitReport(const std::filesystem::path& dir, const Evaluation& evaluation, const nlohmann::json& provenance);

// Rows are query labels, columns the label of the top-1 result; both use the
// sorted union of labels seen in the rankings.
struct Confusion {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> counts;
};

Confusion TopOneConfusion(const std::vector<RankingRecord>& rankings);

// Row-normalized heatmap, `cell` pixels per entry, white (0) to dark red (1).
Image RenderHeatmap(const Confusion& confusion, int cell = 16);

// Loads a thumbnail for an id, or nullopt when none exists (drawn as a grey tile).
using ThumbnailSource = std::function<std::optional<Image>(const std::string& id)>;

struct Montage {
  Image image;
  // Gallery ids placed on each query row, in rank order.
  std::vector<std::vector<std::string>> rows;
};

// One row per query: the query thumbnail, a gap, then the top-k gallery
// thumbnails with a green (relevant) or red frame.
Montage RenderMontage(const std::vector<RankingRecord>& rankings, int k, const ThumbnailSource& queries,
                      const ThumbnailSource& gallery, int thumb = 64);

}  // namespace sbsr::eval
