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

#include <gtest/gtest.h>
#include <fmt/core.h>

#include <fstream>
#include <random>

#include "sbsr/core/error.hpp"
#include "sbsr/eval/metrics.hpp"
#include "sbsr/eval/report.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

namespace sbsr::eval {
namespace {

RowVector Unit(std::initializer_list<double> v) {
  RowVector r(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) r(i++) = x;
  return r.normalized();
}

EmbeddingIndex IndexOf(const std::vector<RowVector>& rows, std::vector<std::string> ids,
                       std::vector<std::string> labels) {
  Matrix m(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i];
  return EmbeddingIndex(std::move(ids), std::move(labels), std::move(m));
}

// Random unit-row instance: `queries` x `gallery`, 5-10 classes, each class
// present in the gallery.
struct Instance {
  EmbeddingIndex index;
  std::vector<RankedList> rankings;
  std::vector<std::string> labels;
};

Instance RandomInstance(std::mt19937_64& rng, int queries = 20, int gallery = 100, int dim = 16) {
  std::uniform_int_distribution<int> class_count(5, 10);
  const int classes = class_count(rng);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::normal_distribution<double> normal;
  std::vector<std::string> ids, labels;
  Matrix m(gallery, dim);
  for (int i = 0; i < gallery; ++i) {
    ids.push_back(fmt::format("g{:03d}", i));
    labels.push_back("c" + std::to_string(i < classes ? i : pick(rng)));
    for (int d = 0; d < dim; ++d) m(i, d) = normal(rng);
    m.row(i).normalize();
  }
  Instance inst{EmbeddingIndex(ids, labels, m), {}, {}};
  for (int q = 0; q < queries; ++q) {
    RowVector v(dim);
    for (int d = 0; d < dim; ++d) v(d) = normal(rng);
    inst.rankings.push_back(Rank(v.normalized(), inst.index, "q" + std::to_string(q)));
    inst.labels.push_back("c" + std::to_string(pick(rng)));
  }
  return inst;
}

TEST(Rank, SelfSimilarityFirst) {
  const auto index = IndexOf({Unit({1, 0, 0}), Unit({0, 1, 0}), Unit({1, 1, 0})}, {"a", "b", "c"}, {"x", "y", "z"});
  const auto r = Rank(Unit({0, 1, 0}), index);
  EXPECT_EQ(r.rows.front(), 1);
  EXPECT_DOUBLE_EQ(r.scores.front(), 1.0);
}

TEST(Rank, MatchesExhaustiveSort) {
  const auto index = IndexOf({Unit({1, 2, 0}), Unit({0, 1, 3}), Unit({-1, 0, 1})}, {"a", "b", "c"}, {"x", "y", "z"});
  const RowVector q = Unit({0.2, 0.5, 0.9});
  std::vector<std::pair<double, int>> oracle;
  for (int i = 0; i < 3; ++i) oracle.push_back({-index.matrix().row(i).dot(q), i});
  std::sort(oracle.begin(), oracle.end());
  const auto r = Rank(q, index);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(r.rows[static_cast<std::size_t>(i)], oracle[static_cast<std::size_t>(i)].second);
}

TEST(Rank, DuplicateVectorsOrderedById) {
  const auto index = IndexOf({Unit({1, 0}), Unit({1, 0}), Unit({1, 0})}, {"c", "a", "b"}, {"x", "x", "x"});
  const auto r = Rank(Unit({1, 0}), index);
  EXPECT_EQ(r.rows, (std::vector<int>{1, 2, 0}));
}

TEST(Rank, ScoresNonIncreasingAndFullPermutation) {
  std::mt19937_64 rng(1);
  const auto inst = RandomInstance(rng);
  for (const auto& r : inst.rankings) {
    auto sorted = r.rows;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
    for (std::size_t i = 1; i < r.scores.size(); ++i) EXPECT_GE(r.scores[i - 1], r.scores[i]);
  }
}

TEST(Rank, EmptyIndex) {
  try {
    Rank(Unit({1, 0}), EmbeddingIndex());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyIndex);
  }
}

TEST(Metrics, PerfectRankingIsAllOnes) {
  const auto index = IndexOf({Unit({1, 0}), Unit({1, 0.1}), Unit({0, 1})}, {"a", "b", "c"}, {"A", "A", "B"});
  const std::vector<RankedList> rankings{Rank(Unit({1, 0}), index, "q")};
  const std::vector<std::string> labels{"A"};
  const auto m = ComputeMetrics(rankings, labels, index);
  for (double v : {m.nn, m.ft, m.st, m.dcg, m.ndcg, m.mrr, m.map}) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Metrics, HandEnumeratedExample) {
  // Gallery labels (A, B, B), query B ranked (A, B, B).
  const std::vector<bool> rel{false, true, true};
  const auto m = ComputeQueryMetrics(rel);
  EXPECT_DOUBLE_EQ(m.rr, 0.5);
  EXPECT_DOUBLE_EQ(m.ap, 7.0 / 12.0);
}

TEST(Metrics, MatchBruteForceOracle) {
  std::mt19937_64 rng(2);
  for (int instance = 0; instance < 50; ++instance) {
    const auto inst = RandomInstance(rng);
    testing::OracleMetrics sum;
    int counted = 0;
    for (std::size_t q = 0; q < inst.rankings.size(); ++q) {
      std::vector<std::string> ranked;
      for (int r : inst.rankings[q].rows) ranked.push_back(inst.index.labels()[static_cast<std::size_t>(r)]);
      if (std::find(ranked.begin(), ranked.end(), inst.labels[q]) == ranked.end()) continue;
      const auto o = testing::BruteForceQueryMetrics(ranked, inst.labels[q]);
      sum.nn += o.nn, sum.ft += o.ft, sum.st += o.st, sum.e += o.e, sum.dcg += o.dcg, sum.rr += o.rr, sum.ap += o.ap;
      ++counted;
    }
    const auto m = ComputeMetrics(inst.rankings, inst.labels, inst.index);
    ASSERT_EQ(m.query_count, static_cast<std::size_t>(counted));
    EXPECT_NEAR(m.nn, sum.nn / counted, 1e-9);
    EXPECT_NEAR(m.ft, sum.ft / counted, 1e-9);
    EXPECT_NEAR(m.st, sum.st / counted, 1e-9);
    EXPECT_NEAR(m.e, sum.e / counted, 1e-9);
    EXPECT_NEAR(m.dcg, sum.dcg / counted, 1e-9);
    EXPECT_NEAR(m.ndcg, sum.dcg / counted, 1e-9);
    EXPECT_NEAR(m.mrr, sum.rr / counted, 1e-9);
    EXPECT_NEAR(m.map, sum.ap / counted, 1e-9);
  }
}

TEST(Metrics, BoundsAndIdentities) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto inst = RandomInstance(rng);
    const auto m = ComputeMetrics(inst.rankings, inst.labels, inst.index);
    for (double v : {m.nn, m.ft, m.st, m.st2, m.e, m.one_minus_e, m.dcg, m.ndcg, m.mrr, m.map}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(m.one_minus_e + m.e, 1.0);
    EXPECT_EQ(m.st2, m.st / 2.0);
    EXPECT_EQ(m.e_cutoff, 32);
    EXPECT_EQ(m.definitions_version, kMetricDefinitionsVersion);
  }
}

TEST(Metrics, SwappingRelevantEarlierNeverHurts) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<bool> rel(40);
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = coin(rng);
    rel[39] = true;
    const auto before = ComputeQueryMetrics(rel);
    // Move the last relevant item into the first non-relevant slot ahead of it.
    auto it = std::find(rel.begin(), rel.end(), false);
    if (it == rel.end()) continue;
    *it = true;
    rel[39] = false;
    const auto after = ComputeQueryMetrics(rel);
    EXPECT_GE(after.ap, before.ap);
    EXPECT_GE(after.rr, before.rr);
    EXPECT_GE(after.dcg, before.dcg);
  }
}

TEST(Metrics, ScaleInvariance) {
  std::mt19937_64 rng(5);
  const auto inst = RandomInstance(rng);
  const Matrix scaled = inst.index.matrix() * 3.7;
  const EmbeddingIndex big(inst.index.ids(), inst.index.labels(), scaled);
  std::normal_distribution<double> normal;
  for (int q = 0; q < 20; ++q) {
    RowVector v(16);
    for (int d = 0; d < 16; ++d) v(d) = normal(rng);
    v.normalize();
    const auto a = Rank(v, inst.index);
    const auto b = Rank(v, big);
    EXPECT_EQ(a.rows, b.rows);
  }
}

TEST(Metrics, QueryWithoutRelevantItemsIsExcluded) {
  const auto index = IndexOf({Unit({1, 0}), Unit({0, 1})}, {"a", "b"}, {"A", "B"});
  const std::vector<RankedList> rankings{Rank(Unit({1, 0}), index, "q1"), Rank(Unit({1, 0}), index, "q2")};
  const std::vector<std::string> labels{"A", "Z"};
  const auto m = ComputeMetrics(rankings, labels, index);
  EXPECT_EQ(m.query_count, 1u);
  EXPECT_EQ(m.excluded_queries, 1u);
  EXPECT_DOUBLE_EQ(m.map, 1.0);
}

Evaluation SmallEvaluation() {
  Evaluation ev;
  ev.index = IndexOf({Unit({1, 0}), Unit({0.9, 0.1}), Unit({0, 1}), Unit({0.1, 0.9})}, {"s1", "s2", "s3", "s4"},
                     {"A", "A", "B", "B"});
  ev.query_ids = {"q1", "q2"};
  ev.query_labels = {"A", "B"};
  ev.rankings = {Rank(Unit({1, 0.05}), ev.index, "q1"), Rank(Unit({0.05, 1}), ev.index, "q2")};
  ev.report = ComputeMetrics(ev.rankings, ev.query_labels, ev.index);
  return ev;
}

TEST(Report, RoundTripsThroughReader) {
  testing::TempDir dir("report");
  const auto ev = SmallEvaluation();
  EmitReport(dir.path(), ev, {{"checkpoint", "x.bin"}});
  const auto back = ReadReport(dir / "report.json");
  ReportFile expected;
  expected.metrics = ev.report;
  expected.provenance = {{"checkpoint", "x.bin"}};
  EXPECT_EQ(back, expected);
  EXPECT_EQ(ReadRankings(dir / "rankings.json"), ToRecords(ev));
}

TEST(Report, RejectsUnknownSchema) {
  testing::TempDir dir("report-schema");
  ReportFile r;
  nlohmann::json j = r;
  j["schema_version"] = 99;
  std::ofstream(dir / "r.json") << j.dump();
  try {
    ReadReport(dir / "r.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

TEST(Report, PerfectClassifierGivesDiagonalConfusion) {
  const auto records = ToRecords(SmallEvaluation());
  const auto c = TopOneConfusion(records);
  ASSERT_EQ(c.labels, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(c.counts, (std::vector<std::vector<int>>{{1, 0}, {0, 1}}));
  const Image heat = RenderHeatmap(c, 4);
  EXPECT_EQ(heat.width, 8);
  // Diagonal cells dark, off-diagonal white.
  EXPECT_LT(heat.at(1, 1, 1), 10);
  EXPECT_EQ(heat.at(5, 1, 1), 255);
}

TEST(Report, MontageHasKThumbnailsPerRow) {
  std::vector<RankingRecord> records;
  for (int q = 0; q < 3; ++q) {
    RankingRecord r{"q" + std::to_string(q), "A", {}};
    for (int i = 0; i < 8; ++i) r.entries.push_back({"g" + std::to_string(i), i % 2 ? "A" : "B", 1.0 - 0.1 * i});
    records.push_back(r);
  }
  auto thumb = [](const std::string&) -> std::optional<Image> { return Image(20, 20, 0); };
  const auto m = RenderMontage(records, 5, thumb, thumb, 16);
  ASSERT_EQ(m.rows.size(), 3u);
  for (const auto& row : m.rows) EXPECT_EQ(row.size(), 5u);
  EXPECT_EQ(m.rows[0], (std::vector<std::string>{"g0", "g1", "g2", "g3", "g4"}));
  EXPECT_EQ(m.image.height, 4 + 3 * (16 + 4));
}

}  // namespace
}  // namespace sbsr::eval
