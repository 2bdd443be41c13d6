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

#include "sbsr/core/tensor.hpp"

#include <random>
#include <span>

#include "sbsr/core/hash.hpp"

namespace sbsr {

Matrix GaussianMatrix(Index rows, Index cols, std::uint64_t seed, double stddev) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) {
    m.data()[i] = normal(engine);
  }
  return m;
}

std::uint64_t MatrixChecksum(const Matrix& m, std::uint64_t seed) {
  const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
  std::uint64_t h = Fnv1a64Bytes(std::as_bytes(std::span(shape)), kFnvOffsetBasis ^ seed);
  return Fnv1a64Bytes(std::as_bytes(std::span(m.data(), static_cast<std::size_t>(m.size()))), h);
}

bool AllFinite(const Matrix& m) { return m.allFinite(); }

}  // namespace sbsr
