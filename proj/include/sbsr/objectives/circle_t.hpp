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

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsr/autograd/autograd.hpp"

namespace sbsr::objectives {

struct CircleTParams {
  double delta_p = 0.75;
  double delta_n = 0.25;
  double gamma = 32.0;
  double beta = 0.5;
  double tau = 0.5;
  double lambda_max = 2.0;

  void Validate() const;
};

void to_json(nlohmann::json& j, const CircleTParams& p);
void from_json(const nlohmann::json& j, CircleTParams& p);

// min(1 + beta * exp(-s_n_mean / tau), lambda_max)
double DynamicScale(double s_n_mean, const CircleTParams& params);

enum class LambdaGradient {
  kDetached,  // lambda is a per-batch constant (training default)
  kFull,      // also differentiate lambda through the mean negative similarity
};

struct CircleTResult {
  double loss = 0.0;
  double lambda = 1.0;
  double d_sp = 0.0;
  std::vector<double> d_sn;
};

// log(1 + sum_n exp(gamma * (a_n (s_n - dn) - lambda * a_p (s_p - dp)))) with
// a_p = [2 - dp - s_p]+, a_n = [s_n + dn]+, by a shifted log-sum-exp.
// The margin weights are differentiated as functions of the similarities.
// `lambda_override` replaces the dynamic scale (and its gradient) when set.
// NonFiniteSimilarity on NaN/Inf input.
CircleTResult CircleTLoss(double s_p, std::span<const double> s_n, const CircleTParams& params,
                          LambdaGradient mode = LambdaGradient::kDetached,
                          std::optional<double> lambda_override = std::nullopt);

// Mean Circle-T over every (anchor, positive) instance of an in-batch
// similarity matrix. Row anchors (anchor_rows = true) see same-label columns
// as positives and all other columns as negatives; column anchors mirror it.
// Anchors without a positive are skipped; zero instances give zero.
ag::Var CircleTBatchLoss(const ag::Var& sims, std::span<const int> row_labels, std::span<const int> col_labels,
                         bool anchor_rows, const CircleTParams& params);

// Per-instance form of the batch loss, for callers that mine explicitly.
struct CircleTInstance {
  int anchor = 0;
  int positive = 0;
  std::vector<int> negatives;
};
std::vector<CircleTInstance> MineInstances(std::span<const int> anchor_labels, std::span<const int> other_labels);

}  // namespace sbsr::objectives
