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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsr/eval/index.hpp"

namespace sbsr::eval {

inline constexpr int kECutoff = 32;
inline constexpr const char* kMetricDefinitionsVersion = "sbsr-metrics/1";

// Per-query values for one ranking, given relevance in rank order.
// C is the number of relevant gallery items (must be >= 1):
//   NN  = rel[1];  FT = hits@C / C;  ST = hits@2C / C
//   E   = 2PR / (P + R) at cutoff min(32, N), P = hits / cutoff, R = hits / C
//   DCG = sum over relevant ranks k of g(k) / sum_{k<=C} g(k), g(1) = 1, g(k) = 1 / log2 k
//   RR  = 1 / rank of the first relevant item
//   AP  = mean over relevant items of precision at their rank
struct QueryMetrics {
  double nn = 0, ft = 0, st = 0, e = 0, dcg = 0, rr = 0, ap = 0;
};

QueryMetrics ComputeQueryMetrics(const std::vector<bool>& relevance, int e_cutoff = kECutoff);

struct MetricsReport {
  double nn = 0, ft = 0, st = 0, st2 = 0, e = 0, one_minus_e = 0, dcg = 0, ndcg = 0, mrr = 0, map = 0;
  std::size_t query_count = 0;
  std::size_t excluded_queries = 0;  // queries whose label has no gallery item
  int e_cutoff = kECutoff;
  std::string definitions_version = kMetricDefinitionsVersion;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

// Averages per-query values. A query with no relevant gallery item is
// excluded with a warning and counted in excluded_queries.
MetricsReport ComputeMetrics(std::span<const RankedList> rankings, std::span<const std::string> query_labels,
                             const EmbeddingIndex& index, int e_cutoff = kECutoff);

}  // namespace sbsr::eval
