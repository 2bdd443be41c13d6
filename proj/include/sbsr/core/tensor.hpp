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

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>

namespace sbsr {

// Dense maps are stored as (positions x channels) with positions in
// row-major spatial order, so a 1x1 convolution is a right matrix product.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

// Entries drawn i.i.d. from N(0, stddev^2) with a mt19937_64 stream seeded by `seed`.
Matrix GaussianMatrix(Index rows, Index cols, std::uint64_t seed, double stddev = 1.0);

// FNV-1a over the raw bytes of the matrix (shape included).
std::uint64_t MatrixChecksum(const Matrix& m, std::uint64_t seed = 0);

bool AllFinite(const Matrix& m);

}  // namespace sbsr
