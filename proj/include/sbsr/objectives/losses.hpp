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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsr/autograd/autograd.hpp"
#include "sbsr/objectives/circle_t.hpp"

namespace sbsr::objectives {

inline constexpr double kDefaultEta = 10.0;
inline constexpr double kDefaultClsTemperature = 10.0;

struct ObjectiveConfig {
  CircleTParams circle;
  double eta = kDefaultEta;
  double cls_temperature = kDefaultClsTemperature;
  bool use_ske_circle = true;
  bool use_view_circle = true;
  bool use_view_cls = true;
  bool use_ske_cls = false;
};

void to_json(nlohmann::json& j, const ObjectiveConfig& c);
void from_json(const nlohmann::json& j, ObjectiveConfig& c);

// Linear classifier over unit-norm embeddings with a learnable logit temperature.
struct ClassifierHead {
  ag::Var weight;       // (classes x D)
  ag::Var temperature;  // (1 x 1)
  std::vector<std::string> class_names;
};

ClassifierHead MakeClassifierHead(std::vector<std::string> class_names, int dim, double temperature,
                                  std::uint64_t seed);

// Mean cross-entropy of softmax(temperature * F W^T). UnknownLabel outside [0, classes).
ag::Var ViewClsLoss(const ag::Var& embeddings, std::span<const int> labels, const ClassifierHead& head);

double TotalLoss(double l_ske, double l_view, double l_cls_view, double eta);
ag::Var TotalLoss(const ag::Var& l_ske, const ag::Var& l_view, const ag::Var& l_cls_view, double eta);

struct LossBreakdown {
  ag::Var ske;
  ag::Var view;
  ag::Var cls_view;
  ag::Var cls_ske;
  ag::Var total;
};

// In-batch objective on unit-norm sketch rows and shape rows. Disabled terms
// contribute a constant zero.
LossBreakdown ComputeObjective(const ag::Var& sketch_embeddings, std::span<const int> sketch_labels,
                               const ag::Var& shape_embeddings, std::span<const int> shape_labels,
                               const ClassifierHead& head, const ObjectiveConfig& config);

}  // namespace sbsr::objectives
