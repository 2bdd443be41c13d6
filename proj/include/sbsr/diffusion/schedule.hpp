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

#include <cstdint>
#include <vector>

#include "sbsr/core/tensor.hpp"

namespace sbsr::diffusion {

class NoiseSchedule {
 public:
  // Betas linear in sqrt-space between beta_start and beta_end (the schedule
  // latent diffusion backbones ship with); alpha_bar is the running product.
  static NoiseSchedule ScaledLinear(int steps = 1000, double beta_start = 0.00085, double beta_end = 0.012);
  // Values must lie in [0, 1] and be non-increasing.
  static NoiseSchedule FromAlphaBar(std::vector<double> alpha_bar);

  int num_steps() const { return static_cast<int>(alpha_bar_.size()); }
  // InvalidTimestep outside [0, num_steps).
  double alpha_bar(int t) const;
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
};

// Standard normal draws from mt19937_64(seed), row-major.
Matrix SampleEpsilon(Index rows, Index cols, std::uint64_t seed);

// z_t = sqrt(alpha_bar) * z0 + sqrt(1 - alpha_bar) * eps, elementwise.
Matrix AddNoise(const Matrix& z0, double alpha_bar, const Matrix& eps);
Matrix AddNoise(const Matrix& z0, int t, std::uint64_t epsilon_seed, const NoiseSchedule& schedule);

}  // namespace sbsr::diffusion
