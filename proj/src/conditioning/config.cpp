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

#include "sbsr/conditioning/config.hpp"

#include "sbsr/core/error.hpp"

namespace sbsr::conditioning {

void ConditioningConfig::Validate() const {
  if (t_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "t_tokens must be at least 1");
  if (!(ip_scale >= 0.0) || !(soft_init_std >= 0.0) || !(soft_l2 >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ip_scale, soft_init_std and soft_l2 must be non-negative");
  }
}

void to_json(nlohmann::json& j, const ConditioningConfig& c) {
  j = {{"t_tokens", c.t_tokens},     {"ip_scale", c.ip_scale},     {"soft_init_std", c.soft_init_std},
       {"soft_l2", c.soft_l2},       {"use_global", c.use_global}, {"use_local", c.use_local},
       {"use_hard", c.use_hard},     {"use_soft", c.use_soft}};
}

void from_json(const nlohmann::json& j, ConditioningConfig& c) {
  c.t_tokens = j.value("t_tokens", c.t_tokens);
  c.ip_scale = j.value("ip_scale", c.ip_scale);
  c.soft_init_std = j.value("soft_init_std", c.soft_init_std);
  c.soft_l2 = j.value("soft_l2", c.soft_l2);
  c.use_global = j.value("use_global", c.use_global);
  c.use_local = j.value("use_local", c.use_local);
  c.use_hard = j.value("use_hard", c.use_hard);
  c.use_soft = j.value("use_soft", c.use_soft);
}

}  // namespace sbsr::conditioning
