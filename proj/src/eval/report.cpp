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

#include "sbsr/eval/report.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <map>
#include <set>

#include "sbsr/core/error.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::eval {

std::vector<RankingRecord> ToRecords(const Evaluation& evaluation) {
  std::vector<RankingRecord> out;
  out.reserve(evaluation.rankings.size());
  for (std::size_t q = 0; q < evaluation.rankings.size(); ++q) {
    const auto& ranked = evaluation.rankings[q];
    RankingRecord rec;
    rec.query_id = ranked.query_id;
    rec.query_label = evaluation.query_labels.at(q);
    for (std::size_t i = 0; i < ranked.rows.size(); ++i) {
      const auto row = static_cast<std::size_t>(ranked.rows[i]);
      rec.entries.push_back({evaluation.index.ids()[row], evaluation.index.labels()[row], ranked.scores[i]});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void to_json(nlohmann::json& j, const ReportFile& r) {
  j = {{"schema_version", r.schema_version}, {"metrics", r.metrics}, {"provenance", r.provenance}};
}

void from_json(const nlohmann::json& j, ReportFile& r) {
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) {
    throw Error(ErrorCode::kParseError, fmt::format("unsupported report schema version {}", r.schema_version));
  }
  r.metrics = j.at("metrics").get<MetricsReport>();
  r.provenance = j.value("provenance", nlohmann::json::object());
}

void to_json(nlohmann::json& j, const RankingRecord& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) entries.push_back({{"id", e.id}, {"label", e.label}, {"score", e.score}});
  j = {{"query_id", r.query_id}, {"query_label", r.query_label}, {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, RankingRecord& r) {
  r.query_id = j.at("query_id").get<std::string>();
  r.query_label = j.at("query_label").get<std::string>();
  r.entries.clear();
  for (const auto& e : j.at("entries")) {
    r.entries.push_back({e.at("id").get<std::string>(), e.at("label").get<std::string>(), e.at("score").get<double>()});
  }
}

namespace {

nlohmann::json ParseJsonFile(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void WriteReport(const std::filesystem::path& path, const ReportFile& report) {
  // max_digits10 round-trip is nlohmann's default for doubles.
  WriteFileAtomic(path, nlohmann::json(report).dump(2) + "\n");
}

ReportFile ReadReport(const std::filesystem::path& path) {
  try {
    return ParseJsonFile(path).get<ReportFile>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void WriteRankings(const std::filesystem::path& path, const std::vector<RankingRecord>& rankings) {
  nlohmann::json j = {{"schema_version", kReportSchemaVersion}, {"rankings", rankings}};
  WriteFileAtomic(path, j.dump() + "\n");
}

std::vector<RankingRecord> ReadRankings(const std::filesystem::path& path) {
  const auto j = ParseJsonFile(path);
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error(ErrorCode::kParseError, "unsupported rankings schema version");
    }
    return j.at("rankings").get<std::vector<RankingRecord>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void EmitReport(const std::filesystem::path& dir, const Evaluation& evaluation, const nlohmann::json& provenance) {
  std::filesystem::create_directories(dir);
  ReportFile report;
  report.metrics = evaluation.report;
  report.provenance = provenance;
  WriteReport(dir / "report.json", report);
  WriteRankings(dir / "rankings.json", ToRecords(evaluation));
}

Confusion TopOneConfusion(const std::vector<RankingRecord>& rankings) {
  std::set<std::string> labels;
  for (const auto& r : rankings) {
    labels.insert(r.query_label);
    for (const auto& e : r.entries) labels.insert(e.label);
  }
  Confusion c;
  c.labels.assign(labels.begin(), labels.end());
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < c.labels.size(); ++i) at[c.labels[i]] = i;
  c.counts.assign(c.labels.size(), std::vector<int>(c.labels.size(), 0));
  for (const auto& r : rankings) {
    if (r.entries.empty()) continue;
    ++c.counts[at[r.query_label]][at[r.entries.front().label]];
  }
  return c;
}

Image RenderHeatmap(const Confusion& confusion, int cell) {
  if (cell < 1) throw Error(ErrorCode::kInvalidArgument, "heatmap cell size must be positive");
  const int n = static_cast<int>(confusion.labels.size());
  Image img(std::max(n, 1) * cell, std::max(n, 1) * cell);
  for (int r = 0; r < n; ++r) {
    const auto& row = confusion.counts[static_cast<std::size_t>(r)];
    int total = 0;
    for (int v : row) total += v;
    for (int col = 0; col < n; ++col) {
      const double v = total > 0 ? static_cast<double>(row[static_cast<std::size_t>(col)]) / total : 0.0;
      const auto g = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
      const auto red = static_cast<std::uint8_t>(std::lround(255.0 - 115.0 * v));
      for (int y = 0; y < cell; ++y) {
        for (int x = 0; x < cell; ++x) img.Set(col * cell + x, r * cell + y, red, g, g);
      }
    }
  }
  return img;
}

namespace {

void Frame(Image& img, int x0, int y0, int size, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int i = 0; i < size; ++i) {
    for (int t = 0; t < 2; ++t) {
      img.Set(x0 + i, y0 + t, r, g, b);
      img.Set(x0 + i, y0 + size - 1 - t, r, g, b);
      img.Set(x0 + t, y0 + i, r, g, b);
      img.Set(x0 + size - 1 - t, y0 + i, r, g, b);
    }
  }
}

Image Thumbnail(const ThumbnailSource& source, const std::string& id, int thumb) {
  if (source) {
    if (auto img = source(id)) return Resize(*img, thumb, thumb);
  }
  return Image(thumb, thumb, 200);
}

}  // namespace

Montage RenderMontage(const std::vector<RankingRecord>& rankings, int k, const ThumbnailSource& queries,
                      const ThumbnailSource& gallery, int thumb) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "montage needs k >= 1");
  if (thumb < 4) throw Error(ErrorCode::kInvalidArgument, "thumbnail too small");
  const int pad = 4;
  const int gap = thumb / 2;
  const int rows = std::max<int>(1, static_cast<int>(rankings.size()));
  Montage m;
  m.image = Image(pad + thumb + gap + k * (thumb + pad), pad + rows * (thumb + pad));
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const auto& rec = rankings[q];
    const int y = pad + static_cast<int>(q) * (thumb + pad);
    Blit(m.image, Thumbnail(queries, rec.query_id, thumb), pad, y);
    std::vector<std::string> placed;
    const int shown = std::min<int>(k, static_cast<int>(rec.entries.size()));
    for (int i = 0; i < shown; ++i) {
      const auto& e = rec.entries[static_cast<std::size_t>(i)];
      const int x = pad + thumb + gap + i * (thumb + pad);
      Blit(m.image, Thumbnail(gallery, e.id, thumb), x, y);
      if (e.label == rec.query_label) {
        Frame(m.image, x, y, thumb, 40, 170, 60);
      } else {
        Frame(m.image, x, y, thumb, 210, 40, 40);
      }
      placed.push_back(e.id);
    }
    m.rows.push_back(std::move(placed));
  }
  return m;
}

}  // namespace sbsr::eval
