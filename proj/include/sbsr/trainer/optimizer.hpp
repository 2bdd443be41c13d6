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
#include <map>
#include <span>
#include <string>

#include "sbsr/trainer/model.hpp"

namespace sbsr::trainer {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double weight_decay = 0.09;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 5.0;  // global norm; 0 disables
};

struct Moments {
  Matrix m;
  Matrix v;
};

// Adaptive moments with decoupled weight decay (decay applied as
// p *= 1 - lr * wd before the moment step). Parameters that received no
// gradient this step are left untouched.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config) : config_(config) {}

  // Clips, updates, and clears gradients. Returns the pre-clip global norm.
  double Step(std::span<const NamedParam> params);

  std::int64_t steps() const { return steps_; }
  const std::map<std::string, Moments>& moments() const { return moments_; }
  void Restore(std::int64_t steps, std::map<std::string, Moments> moments);

 private:
  AdamWConfig config_;
  std::int64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace sbsr::trainer
