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

#include <nlohmann/json.hpp>

namespace sbsr::conditioning {

struct ConditioningConfig {
  int t_tokens = 4;
  double ip_scale = 1.0;
  double soft_init_std = 0.02;
  double soft_l2 = 1e-4;
  bool use_global = true;
  bool use_local = true;
  bool use_hard = true;
  bool use_soft = true;

  void Validate() const;
};

void to_json(nlohmann::json& j, const ConditioningConfig& c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ConditioningConfig& c);

}  // namespace sbsr::conditioning
