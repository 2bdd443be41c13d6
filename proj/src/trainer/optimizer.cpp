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

#include "sbsr/trainer/optimizer.hpp"

#include <cmath>

namespace sbsr::trainer {

double AdamW::Step(std::span<const NamedParam> params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.var.has_grad()) sq += p.var.grad().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  const double clip = (config_.grad_clip > 0.0 && norm > config_.grad_clip) ? config_.grad_clip / norm : 1.0;

  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  for (const auto& p : params) {
    ag::Var var = p.var;
    if (!var.has_grad()) continue;
    const Matrix g = var.grad() * clip;
    auto [it, inserted] = moments_.try_emplace(p.name);
    Moments& mo = it->second;
    if (inserted) {
      mo.m = Matrix::Zero(g.rows(), g.cols());
      mo.v = Matrix::Zero(g.rows(), g.cols());
    }
    mo.m = b1 * mo.m + (1.0 - b1) * g;
    mo.v = b2 * mo.v + (1.0 - b2) * g.cwiseProduct(g);
    Matrix& w = var.mutable_value();
    if (p.decay && config_.weight_decay != 0.0) w *= 1.0 - lr * config_.weight_decay;
    w.array() -= lr * (mo.m.array() / c1) / ((mo.v.array() / c2).sqrt() + config_.eps);
    var.ZeroGrad();
  }
  return norm;
}

void AdamW::Restore(std::int64_t steps, std::map<std::string, Moments> moments) {
  steps_ = steps;
  moments_ = std::move(moments);
}

}  // namespace sbsr::trainer
