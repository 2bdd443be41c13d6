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

#include "sbsr/eval/metrics.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "sbsr/core/error.hpp"

namespace sbsr::eval {

namespace {

double Gain(std::size_t rank) { return rank == 1 ? 1.0 : 1.0 / std::log2(static_cast<double>(rank)); }

}  // namespace

QueryMetrics ComputeQueryMetrics(const std::vector<bool>& relevance, int e_cutoff) {
  const std::size_t n = relevance.size();
  const auto c = static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), true));
  if (c == 0) throw Error(ErrorCode::kNoRelevantItems, "ranking has no relevant item");
  const std::size_t cutoff = std::min<std::size_t>(static_cast<std::size_t>(e_cutoff), n);

  QueryMetrics m;
  m.nn = relevance[0] ? 1.0 : 0.0;
  std::size_t hits = 0, hits_c = 0, hits_2c = 0, hits_e = 0;
  double dcg = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevance[i]) continue;
    const std::size_t rank = i + 1;
    ++hits;
    if (rank <= c) ++hits_c;
    if (rank <= 2 * c) ++hits_2c;
    if (rank <= cutoff) ++hits_e;
    if (hits == 1) m.rr = 1.0 / static_cast<double>(rank);
    dcg += Gain(rank);
    ap += static_cast<double>(hits) / static_cast<double>(rank);
  }
  double ideal = 0.0;
  for (std::size_t k = 1; k <= c; ++k) ideal += Gain(k);
  const double cd = static_cast<double>(c);
  m.ft = static_cast<double>(hits_c) / cd;
  m.st = static_cast<double>(hits_2c) / cd;
  m.dcg = dcg / ideal;
  m.ap = ap / cd;
  const double p = static_cast<double>(hits_e) / static_cast<double>(cutoff);
  const double r = static_cast<double>(hits_e) / cd;
  m.e = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return m;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = {{"NN", r.nn},
       {"FT", r.ft},
       {"ST", r.st},
       {"ST2", r.st2},
       {"E", r.e},
       {"one_minus_E", r.one_minus_e},
       {"DCG", r.dcg},
       {"nDCG", r.ndcg},
       {"MRR", r.mrr},
       {"mAP", r.map},
       {"query_count", r.query_count},
       {"excluded_queries", r.excluded_queries},
       {"e_cutoff", r.e_cutoff},
       {"definitions_version", r.definitions_version}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.nn = j.at("NN").get<double>();
  r.ft = j.at("FT").get<double>();
  r.st = j.at("ST").get<double>();
  r.st2 = j.at("ST2").get<double>();
  r.e = j.at("E").get<double>();
  r.one_minus_e = j.at("one_minus_E").get<double>();
  r.dcg = j.at("DCG").get<double>();
  r.ndcg = j.at("nDCG").get<double>();
  r.mrr = j.at("MRR").get<double>();
  r.map = j.at("mAP").get<double>();
  r.query_count = j.at("query_count").get<std::size_t>();
  r.excluded_queries = j.at("excluded_queries").get<std::size_t>();
  r.e_cutoff = j.at("e_cutoff").get<int>();
  r.definitions_version = j.at("definitions_version").get<std::string>();
}

MetricsReport ComputeMetrics(std::span<const RankedList> rankings, std::span<const std::string> query_labels,
                             const EmbeddingIndex& index, int e_cutoff) {
  if (rankings.size() != query_labels.size()) throw Error(ErrorCode::kShapeMismatch, "one label per ranking");
  MetricsReport out;
  out.e_cutoff = e_cutoff;
  QueryMetrics sum;
  std::vector<bool> relevance;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const auto& rows = rankings[q].rows;
    if (rows.size() != index.size()) {
      throw Error(ErrorCode::kShapeMismatch, fmt::format("ranking {} is not a full gallery permutation", q));
    }
    relevance.assign(rows.size(), false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      relevance[i] = index.labels()[static_cast<std::size_t>(rows[i])] == query_labels[q];
    }
    if (std::find(relevance.begin(), relevance.end(), true) == relevance.end()) {
      spdlog::warn("query {} (label {}) has no relevant gallery item; excluded", rankings[q].query_id, query_labels[q]);
      ++out.excluded_queries;
      continue;
    }
    const auto m = ComputeQueryMetrics(relevance, e_cutoff);
    sum.nn += m.nn;
    sum.ft += m.ft;
    sum.st += m.st;
    sum.e += m.e;
    sum.dcg += m.dcg;
    sum.rr += m.rr;
    sum.ap += m.ap;
    ++out.query_count;
  }
  if (out.query_count == 0) return out;
  const double n = static_cast<double>(out.query_count);
  out.nn = sum.nn / n;
  out.ft = sum.ft / n;
  out.st = sum.st / n;
  out.st2 = out.st / 2.0;
  out.e = sum.e / n;
  out.one_minus_e = 1.0 - out.e;
  out.dcg = sum.dcg / n;
  out.ndcg = out.dcg;
  out.mrr = sum.rr / n;
  out.map = sum.ap / n;
  return out;
}

}  // namespace sbsr::eval
