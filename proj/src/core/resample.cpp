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

#include "sbsr/core/resample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "sbsr/core/error.hpp"

namespace sbsr {

namespace {

using Key = std::tuple<int, int, int, int, int>;

template <typename Build>
SparseOperator Cached(const Key& key, Build build) {
  static std::mutex mu;
  static std::map<Key, SparseOperator> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto op = std::make_shared<const SparseMatrix>(build());
  cache.emplace(key, op);
  return op;
}

void CheckPositive(int h, int w) {
  if (h <= 0 || w <= 0) throw Error(ErrorCode::kInvalidArgument, "resample dims must be positive");
}

// Source taps for one output coordinate under half-pixel alignment.
void BilinearTaps(int out_index, int in_size, int out_size, int& i0, int& i1, double& w1) {
  const double scale = static_cast<double>(in_size) / out_size;
  double src = (out_index + 0.5) * scale - 0.5;
  if (src < 0.0) src = 0.0;
  i0 = std::min(static_cast<int>(std::floor(src)), in_size - 1);
  i1 = std::min(i0 + 1, in_size - 1);
  w1 = src - i0;
}

}  // namespace

SparseOperator AveragePoolOperator(int height, int width, int factor) {
  CheckPositive(height, width);
  if (factor <= 0 || height % factor != 0 || width % factor != 0) {
    throw Error(ErrorCode::kInvalidArgument, "pooling factor must divide both sides");
  }
  return Cached({0, height, width, factor, 0}, [&] {
    const int oh = height / factor;
    const int ow = width / factor;
    const double w = 1.0 / (factor * factor);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(height) * width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) t.emplace_back((y / factor) * ow + x / factor, y * width + x, w);
    }
    SparseMatrix m(static_cast<Index>(oh) * ow, static_cast<Index>(height) * width);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  });
}

SparseOperator NearestUpsample2xOperator(int height, int width) {
  CheckPositive(height, width);
  return Cached({1, height, width, 2, 0}, [&] {
    const int oh = height * 2;
    const int ow = width * 2;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) t.emplace_back(y * ow + x, (y / 2) * width + x / 2, 1.0);
    }
    SparseMatrix m(static_cast<Index>(oh) * ow, static_cast<Index>(height) * width);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  });
}

SparseOperator BilinearResizeOperator(int in_height, int in_width, int out_height, int out_width) {
  CheckPositive(in_height, in_width);
  CheckPositive(out_height, out_width);
  return Cached({2, in_height, in_width, out_height, out_width}, [&] {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(out_height) * out_width * 4);
    for (int y = 0; y < out_height; ++y) {
      int y0, y1;
      double wy;
      BilinearTaps(y, in_height, out_height, y0, y1, wy);
      for (int x = 0; x < out_width; ++x) {
        int x0, x1;
        double wx;
        BilinearTaps(x, in_width, out_width, x0, x1, wx);
        const int row = y * out_width + x;
        // Duplicate taps at the border are summed by setFromTriplets.
        t.emplace_back(row, y0 * in_width + x0, (1 - wy) * (1 - wx));
        t.emplace_back(row, y0 * in_width + x1, (1 - wy) * wx);
        t.emplace_back(row, y1 * in_width + x0, wy * (1 - wx));
        t.emplace_back(row, y1 * in_width + x1, wy * wx);
      }
    }
    SparseMatrix m(static_cast<Index>(out_height) * out_width, static_cast<Index>(in_height) * in_width);
    m.setFromTriplets(t.begin(), t.end());
    m.prune(0.0);
    return m;
  });
}

}  // namespace sbsr
