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

#include "sbsr/objectives/circle_t.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "sbsr/core/error.hpp"

namespace sbsr::objectives {

void CircleTParams::Validate() const {
  for (double v : {delta_p, delta_n, gamma, beta, tau, lambda_max}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "circle-T parameters must be finite");
  }
  if (gamma <= 0.0 || tau <= 0.0 || beta < 0.0 || lambda_max < 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "need gamma > 0, tau > 0, beta >= 0, lambda_max >= 1");
  }
}

void to_json(nlohmann::json& j, const CircleTParams& p) {
  j = {{"delta_p", p.delta_p}, {"delta_n", p.delta_n}, {"gamma", p.gamma},
       {"beta", p.beta},       {"tau", p.tau},         {"lambda_max", p.lambda_max}};
}

void from_json(const nlohmann::json& j, CircleTParams& p) {
  p.delta_p = j.value("delta_p", p.delta_p);
  p.delta_n = j.value("delta_n", p.delta_n);
  p.gamma = j.value("gamma", p.gamma);
  p.beta = j.value("beta", p.beta);
  p.tau = j.value("tau", p.tau);
  p.lambda_max = j.value("lambda_max", p.lambda_max);
}

double DynamicScale(double s_n_mean, const CircleTParams& params) {
  if (params.beta == 0.0) return 1.0;
  const double raw = 1.0 + params.beta * std::exp(-s_n_mean / params.tau);
  return std::min(raw, params.lambda_max);
}

CircleTResult CircleTLoss(double s_p, std::span<const double> s_n, const CircleTParams& params, LambdaGradient mode,
                          std::optional<double> lambda_override) {
  if (!std::isfinite(s_p)) throw Error(ErrorCode::kNonFiniteSimilarity, "positive similarity");
  for (double v : s_n) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteSimilarity, "negative similarity");
  }
  CircleTResult r;
  r.d_sn.assign(s_n.size(), 0.0);
  if (s_n.empty()) return r;

  double mean = 0.0;
  for (double v : s_n) mean += v;
  mean /= static_cast<double>(s_n.size());
  r.lambda = lambda_override ? *lambda_override : DynamicScale(mean, params);

  const double g = params.gamma;
  const double ap = std::max(0.0, 2.0 - params.delta_p - s_p);
  const double pos = ap * (s_p - params.delta_p);
  // d(ap * (s_p - dp)) / d s_p
  const double dpos = ap > 0.0 ? ap - (s_p - params.delta_p) : 0.0;

  std::vector<double> z(s_n.size());
  double zmax = 0.0;  // the "1 +" term is exp(0)
  for (std::size_t i = 0; i < s_n.size(); ++i) {
    const double an = std::max(0.0, s_n[i] + params.delta_n);
    z[i] = g * (an * (s_n[i] - params.delta_n) - r.lambda * pos);
    zmax = std::max(zmax, z[i]);
  }
  double acc = 0.0;
  for (double zi : z) acc += std::exp(zi - zmax);
  // With zmax = 0 the sum may be far below 1; log1p keeps its relative precision.
  r.loss = zmax > 0.0 ? zmax + std::log(std::exp(-zmax) + acc) : std::log1p(acc);

  double lambda_slope = 0.0;  // d lambda / d mean
  if (mode == LambdaGradient::kFull && !lambda_override && params.beta > 0.0) {
    const double raw = 1.0 + params.beta * std::exp(-mean / params.tau);
    if (raw < params.lambda_max) lambda_slope = -(raw - 1.0) / params.tau;
  }
  double sum_w = 0.0;
  for (std::size_t i = 0; i < s_n.size(); ++i) {
    const double w = std::exp(z[i] - r.loss);  // dL/dz_i
    sum_w += w;
    const double an = std::max(0.0, s_n[i] + params.delta_n);
    const double dneg = an > 0.0 ? an + (s_n[i] - params.delta_n) : 0.0;
    r.d_sn[i] = w * g * dneg;
  }
  r.d_sp = -sum_w * g * r.lambda * dpos;
  if (lambda_slope != 0.0) {
    // dL/dlambda = -g * pos * sum_w, spread evenly over the negatives through the mean.
    const double share = -g * pos * sum_w * lambda_slope / static_cast<double>(s_n.size());
    for (double& d : r.d_sn) d += share;
  }
  return r;
}

std::vector<CircleTInstance> MineInstances(std::span<const int> anchor_labels, std::span<const int> other_labels) {
  std::vector<CircleTInstance> out;
  for (std::size_t a = 0; a < anchor_labels.size(); ++a) {
    std::vector<int> positives, negatives;
    for (std::size_t o = 0; o < other_labels.size(); ++o) {
      (other_labels[o] == anchor_labels[a] ? positives : negatives).push_back(static_cast<int>(o));
    }
    if (positives.empty()) {
      spdlog::warn("anchor {} (label {}) has no positive in the batch; skipped", a, anchor_labels[a]);
      continue;
    }
    for (int p : positives) out.push_back({static_cast<int>(a), p, negatives});
  }
  return out;
}

ag::Var CircleTBatchLoss(const ag::Var& sims, std::span<const int> row_labels, std::span<const int> col_labels,
                         bool anchor_rows, const CircleTParams& params) {
  const Matrix& s = sims.value();
  if (static_cast<std::size_t>(s.rows()) != row_labels.size() ||
      static_cast<std::size_t>(s.cols()) != col_labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "similarity matrix does not match the label lists");
  }
  auto at = [&](int anchor, int other) { return anchor_rows ? s(anchor, other) : s(other, anchor); };
  const auto instances = anchor_rows ? MineInstances(row_labels, col_labels) : MineInstances(col_labels, row_labels);

  Matrix grad = Matrix::Zero(s.rows(), s.cols());
  auto add = [&](int anchor, int other, double v) {
    (anchor_rows ? grad(anchor, other) : grad(other, anchor)) += v;
  };
  double total = 0.0;
  std::vector<double> neg;
  for (const auto& inst : instances) {
    neg.clear();
    for (int n : inst.negatives) neg.push_back(at(inst.anchor, n));
    const auto r = CircleTLoss(at(inst.anchor, inst.positive), neg, params);
    total += r.loss;
    add(inst.anchor, inst.positive, r.d_sp);
    for (std::size_t i = 0; i < inst.negatives.size(); ++i) add(inst.anchor, inst.negatives[i], r.d_sn[i]);
  }
  const double count = instances.empty() ? 1.0 : static_cast<double>(instances.size());
  grad /= count;
  Matrix value(1, 1);
  value(0, 0) = total / count;
  return ag::MakeResult(std::move(value), {sims}, [grad = std::move(grad)](ag::Node& self) {
    self.input(0).AccumulateExpr(self.grad(0, 0) * grad);
  });
}

}  // namespace sbsr::objectives
