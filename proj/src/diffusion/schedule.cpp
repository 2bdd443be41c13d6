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

#include "sbsr/diffusion/schedule.hpp"

#include <fmt/core.h>

#include <cmath>

#include "sbsr/core/error.hpp"

namespace sbsr::diffusion {

NoiseSchedule NoiseSchedule::ScaledLinear(int steps, double beta_start, double beta_end) {
  if (steps < 2) throw Error(ErrorCode::kInvalidArgument, "schedule needs at least two steps");
  NoiseSchedule s;
  s.alpha_bar_.reserve(static_cast<std::size_t>(steps));
  const double lo = std::sqrt(beta_start);
  const double hi = std::sqrt(beta_end);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double root = lo + (hi - lo) * t / (steps - 1);
    prod *= 1.0 - root * root;
    s.alpha_bar_.push_back(prod);
  }
  return s;
}

NoiseSchedule NoiseSchedule::FromAlphaBar(std::vector<double> alpha_bar) {
  for (std::size_t i = 0; i < alpha_bar.size(); ++i) {
    if (!(alpha_bar[i] >= 0.0 && alpha_bar[i] <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha_bar outside [0,1]");
    if (i > 0 && alpha_bar[i] > alpha_bar[i - 1]) throw Error(ErrorCode::kInvalidArgument, "alpha_bar must not increase");
  }
  NoiseSchedule s;
  s.alpha_bar_ = std::move(alpha_bar);
  return s;
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t >= num_steps()) {
    throw Error(ErrorCode::kInvalidTimestep, fmt::format("timestep {} outside [0, {})", t, num_steps()));
  }
  return alpha_bar_[static_cast<std::size_t>(t)];
}

Matrix SampleEpsilon(Index rows, Index cols, std::uint64_t seed) { return GaussianMatrix(rows, cols, seed, 1.0); }

Matrix AddNoise(const Matrix& z0, double alpha_bar, const Matrix& eps) {
  if (z0.rows() != eps.rows() || z0.cols() != eps.cols()) throw Error(ErrorCode::kShapeMismatch, "noise shape");
  return std::sqrt(alpha_bar) * z0 + std::sqrt(1.0 - alpha_bar) * eps;
}

Matrix AddNoise(const Matrix& z0, int t, std::uint64_t epsilon_seed, const NoiseSchedule& schedule) {
  const double ab = schedule.alpha_bar(t);
  return AddNoise(z0, ab, SampleEpsilon(z0.rows(), z0.cols(), epsilon_seed));
}

}  // namespace sbsr::diffusion
