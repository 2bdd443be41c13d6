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

#include <string>
#include <string_view>
#include <vector>

#include "sbsr/aggregation/embedding_store.hpp"
#include "sbsr/core/tensor.hpp"

namespace sbsr::eval {

// Immutable gallery: unit rows with ids and labels.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  EmbeddingIndex(std::vector<std::string> ids, std::vector<std::string> labels, Matrix matrix);
  static EmbeddingIndex FromStore(const aggregation::EmbeddingStore& store);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t CountLabel(std::string_view label) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  Matrix matrix_;
};

struct RankedList {
  std::string query_id;
  std::vector<int> rows;  // gallery rows, best first; a full permutation
  std::vector<double> scores;
};

// Descending cosine (dot product of unit vectors); ties by ascending id. EmptyIndex on an empty gallery.
RankedList Rank(const RowVector& query, const EmbeddingIndex& index, std::string query_id = {});

}  // namespace sbsr::eval
