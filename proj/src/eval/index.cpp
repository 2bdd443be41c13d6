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

#include "sbsr/eval/index.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "sbsr/core/error.hpp"

namespace sbsr::eval {

EmbeddingIndex::EmbeddingIndex(std::vector<std::string> ids, std::vector<std::string> labels, Matrix matrix)
    : ids_(std::move(ids)), labels_(std::move(labels)), matrix_(std::move(matrix)) {
  if (labels_.size() != ids_.size() || static_cast<std::size_t>(matrix_.rows()) != ids_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "index ids, labels and rows disagree");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, "index id " + id);
  }
}

EmbeddingIndex EmbeddingIndex::FromStore(const aggregation::EmbeddingStore& store) {
  return EmbeddingIndex(store.ids, store.labels, store.vectors);
}

std::size_t EmbeddingIndex::CountLabel(std::string_view label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

RankedList Rank(const RowVector& query, const EmbeddingIndex& index, std::string query_id) {
  if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "gallery index is empty");
  if (query.size() != index.matrix().cols()) throw Error(ErrorCode::kShapeMismatch, "query width differs from index");
  const Eigen::VectorXd scores = index.matrix() * query.transpose();
  RankedList out;
  out.query_id = std::move(query_id);
  out.rows.resize(index.size());
  std::iota(out.rows.begin(), out.rows.end(), 0);
  const auto& ids = index.ids();
  std::sort(out.rows.begin(), out.rows.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
  });
  out.scores.reserve(out.rows.size());
  for (int r : out.rows) out.scores.push_back(scores[r]);
  return out;
}

}  // namespace sbsr::eval
