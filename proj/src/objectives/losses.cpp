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

#include "sbsr/objectives/losses.hpp"

#include <cmath>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"

namespace sbsr::objectives {

namespace {

ag::Var Zero() { return ag::Var::Constant(Matrix::Zero(1, 1)); }

}  // namespace

void to_json(nlohmann::json& j, const ObjectiveConfig& c) {
  j = {{"circle", c.circle},
       {"eta", c.eta},
       {"cls_temperature", c.cls_temperature},
       {"use_ske_circle", c.use_ske_circle},
       {"use_view_circle", c.use_view_circle},
       {"use_view_cls", c.use_view_cls},
       {"use_ske_cls", c.use_ske_cls}};
}

void from_json(const nlohmann::json& j, ObjectiveConfig& c) {
  if (j.contains("circle")) c.circle = j.at("circle").get<CircleTParams>();
  c.eta = j.value("eta", c.eta);
  c.cls_temperature = j.value("cls_temperature", c.cls_temperature);
  c.use_ske_circle = j.value("use_ske_circle", c.use_ske_circle);
  c.use_view_circle = j.value("use_view_circle", c.use_view_circle);
  c.use_view_cls = j.value("use_view_cls", c.use_view_cls);
  c.use_ske_cls = j.value("use_ske_cls", c.use_ske_cls);
}

ClassifierHead MakeClassifierHead(std::vector<std::string> class_names, int dim, double temperature,
                                  std::uint64_t seed) {
  if (class_names.empty() || dim <= 0) throw Error(ErrorCode::kInvalidArgument, "classifier needs classes and a width");
  ClassifierHead h;
  h.weight = ag::Var::Parameter(GaussianMatrix(static_cast<Index>(class_names.size()), dim,
                                               HashCombine(seed, Fnv1a64("classifier")),
                                               1.0 / std::sqrt(static_cast<double>(dim))));
  h.temperature = ag::Var::Parameter(Matrix::Constant(1, 1, temperature));
  h.class_names = std::move(class_names);
  return h;
}

ag::Var ViewClsLoss(const ag::Var& embeddings, std::span<const int> labels, const ClassifierHead& head) {
  return ag::CrossEntropy(ag::ScaleBy(ag::MatMulNT(embeddings, head.weight), head.temperature), labels);
}

double TotalLoss(double l_ske, double l_view, double l_cls_view, double eta) { return l_ske + l_view + eta * l_cls_view; }

ag::Var TotalLoss(const ag::Var& l_ske, const ag::Var& l_view, const ag::Var& l_cls_view, double eta) {
  return ag::Add(ag::Add(l_ske, l_view), ag::Scale(l_cls_view, eta));
}

LossBreakdown ComputeObjective(const ag::Var& sketch_embeddings, std::span<const int> sketch_labels,
                               const ag::Var& shape_embeddings, std::span<const int> shape_labels,
                               const ClassifierHead& head, const ObjectiveConfig& config) {
  LossBreakdown out;
  const ag::Var sims = ag::MatMulNT(sketch_embeddings, shape_embeddings);
  out.ske = config.use_ske_circle ? CircleTBatchLoss(sims, sketch_labels, shape_labels, true, config.circle) : Zero();
  out.view = config.use_view_circle ? CircleTBatchLoss(sims, sketch_labels, shape_labels, false, config.circle) : Zero();
  out.cls_view = config.use_view_cls ? ViewClsLoss(shape_embeddings, shape_labels, head) : Zero();
  out.cls_ske = config.use_ske_cls ? ViewClsLoss(sketch_embeddings, sketch_labels, head) : Zero();
  out.total = TotalLoss(out.ske, out.view, out.cls_view, config.eta);
  if (config.use_ske_cls) out.total = ag::Add(out.total, ag::Scale(out.cls_ske, config.eta));
  return out;
}

}  // namespace sbsr::objectives
