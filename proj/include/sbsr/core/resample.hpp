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

#include <memory>

#include "sbsr/core/tensor.hpp"

// Spatial resampling as constant sparse operators over (positions x channels)
// maps. Operators are cached per shape and shared; they are immutable.
namespace sbsr {

using SparseOperator = std::shared_ptr<const SparseMatrix>;

// Mean over non-overlapping factor x factor windows; both sides must divide by factor.
SparseOperator AveragePoolOperator(int height, int width, int factor);

// Each output pixel copies its source pixel at (y/2, x/2).
SparseOperator NearestUpsample2xOperator(int height, int width);

// Bilinear interpolation with half-pixel centers (align_corners = false);
// source coordinates below zero clamp to the first row/column.
SparseOperator BilinearResizeOperator(int in_height, int in_width, int out_height, int out_width);

}  // namespace sbsr
