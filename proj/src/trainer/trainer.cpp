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

#include "sbsr/trainer/trainer.hpp"

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"

namespace sbsr::trainer {

namespace {

constexpr const char* kTraceFile = "loss_trace.jsonl";

// Sample k of n indices: without replacement when possible.
std::vector<int> Sample(const std::vector<int>& pool, int k, std::mt19937_64& rng) {
  std::vector<int> out;
  if (static_cast<int>(pool.size()) >= k) {
    std::vector<int> copy = pool;
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), copy.size() - 1);
      std::swap(copy[static_cast<std::size_t>(i)], copy[pick(rng)]);
      out.push_back(copy[static_cast<std::size_t>(i)]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int i = 0; i < k; ++i) out.push_back(pool[pick(rng)]);
  }
  return out;
}

// Config fields that may change between a checkpoint and its resumption.
nlohmann::json ResumeInvariant(nlohmann::json j) {
  for (const char* key : {"name", "epochs", "max_steps", "checkpoint_every", "run_root"}) j.erase(key);
  return j;
}

void RewriteTrace(const std::filesystem::path& path, std::int64_t keep_below) {
  if (!std::filesystem::exists(path)) return;
  std::string kept;
  for (const auto& l : ReadLossTrace(path)) {
    if (l.step < keep_below) kept += ToJson(l).dump() + "\n";
  }
  WriteFileAtomic(path, kept);
}

}  // namespace

TrainingData PrepareTrainingData(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split,
                                 const Embedder& embedder) {
  TrainingData d;
  d.class_names.assign(split.seen_categories.begin(), split.seen_categories.end());
  if (d.class_names.empty()) throw Error(ErrorCode::kInsufficientData, "split has no seen categories");
  std::map<std::string, int> label;
  for (std::size_t i = 0; i < d.class_names.size(); ++i) label.emplace(d.class_names[i], static_cast<int>(i));
  d.sketches_by_class.resize(d.class_names.size());
  d.shapes_by_class.resize(d.class_names.size());

  for (const auto& sk : manifest.sketches) {
    if (sk.role != dataset::Role::kTrain || !split.IsSeen(sk.category)) continue;
    const int y = label.at(sk.category);
    d.sketches_by_class[static_cast<std::size_t>(y)].push_back(static_cast<int>(d.sketches.size()));
    d.sketches.push_back(embedder.PrepareSketch(sk));
    d.sketch_labels.push_back(y);
  }
  for (const auto& sh : manifest.shapes) {
    if (!split.IsSeen(sh.category)) continue;
    const int y = label.at(sh.category);
    d.shapes_by_class[static_cast<std::size_t>(y)].push_back(static_cast<int>(d.shapes.size()));
    d.shapes.push_back(embedder.PrepareShape(sh));
    d.shape_labels.push_back(y);
  }
  for (std::size_t c = 0; c < d.class_names.size(); ++c) {
    if (d.shapes_by_class[c].empty()) {
      throw Error(ErrorCode::kInsufficientData, fmt::format("seen category '{}' has no shape", d.class_names[c]));
    }
    if (d.sketches_by_class[c].empty()) {
      throw Error(ErrorCode::kInsufficientData,
                  fmt::format("seen category '{}' has no training sketch", d.class_names[c]));
    }
  }
  return d;
}

TrainBatch BuildBatch(const TrainingData& data, int classes_per_batch, int per_class, std::mt19937_64& rng) {
  if (classes_per_batch < 1 || per_class < 1) throw Error(ErrorCode::kInvalidArgument, "P and K must be positive");
  std::vector<int> classes(data.class_names.size());
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] = static_cast<int>(i);
  const int p = std::min<int>(classes_per_batch, static_cast<int>(classes.size()));
  TrainBatch b;
  for (int c : Sample(classes, p, rng)) {
    for (int s : Sample(data.sketches_by_class[static_cast<std::size_t>(c)], per_class, rng)) {
      b.sketches.push_back(s);
      b.sketch_labels.push_back(c);
    }
    for (int s : Sample(data.shapes_by_class[static_cast<std::size_t>(c)], per_class, rng)) {
      b.shapes.push_back(s);
      b.shape_labels.push_back(c);
    }
  }
  return b;
}

std::mt19937_64 StepRng(std::uint64_t seed, std::int64_t step, std::string_view stream) {
  return std::mt19937_64(HashCombine(HashCombine(seed, Fnv1a64(stream)), static_cast<std::uint64_t>(step)));
}

nlohmann::json ToJson(const StepLosses& l) {
  return {{"step", l.step},       {"ske", l.ske},         {"view", l.view},   {"cls_view", l.cls_view},
          {"cls_ske", l.cls_ske}, {"soft_l2", l.soft_l2}, {"total", l.total}, {"grad_norm", l.grad_norm}};
}

StepLosses StepLossesFromJson(const nlohmann::json& j) {
  StepLosses l;
  l.step = j.at("step").get<std::int64_t>();
  l.ske = j.at("ske").get<double>();
  l.view = j.at("view").get<double>();
  l.cls_view = j.at("cls_view").get<double>();
  l.cls_ske = j.value("cls_ske", 0.0);
  l.soft_l2 = j.value("soft_l2", 0.0);
  l.total = j.at("total").get<double>();
  l.grad_norm = j.value("grad_norm", 0.0);
  return l;
}

StepLosses TrainStep(const Embedder& embedder, const TrainingData& data, const TrainBatch& batch,
                     ModelParams& params, AdamW& optimizer, std::int64_t step) {
  auto rng = StepRng(embedder.config().seed, step, "epsilon");
  std::vector<ag::Var> sketch_rows;
  for (int s : batch.sketches) {
    sketch_rows.push_back(embedder.EmbedSketch(data.sketches[static_cast<std::size_t>(s)], params, rng()));
  }
  std::vector<ag::Var> shape_rows;
  for (int s : batch.shapes) {
    const auto& views = data.shapes[static_cast<std::size_t>(s)];
    std::vector<std::uint64_t> seeds(views.size());
    for (auto& seed : seeds) seed = rng();
    shape_rows.push_back(embedder.EmbedShape(views, params, seeds));
  }
  const auto losses =
      objectives::ComputeObjective(ag::ConcatRows(sketch_rows), batch.sketch_labels, ag::ConcatRows(shape_rows),
                                   batch.shape_labels, params.head, embedder.config().objective);
  const ag::Var penalty = embedder.conditioner().SoftPromptPenalty(params.conditioning);

  StepLosses out;
  out.step = step;
  out.ske = losses.ske.scalar();
  out.view = losses.view.scalar();
  out.cls_view = losses.cls_view.scalar();
  out.cls_ske = losses.cls_ske.scalar();
  out.soft_l2 = penalty.scalar();
  out.total = losses.total.scalar();
  for (double v : {out.ske, out.view, out.cls_view, out.cls_ske, out.soft_l2, out.total}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteLoss, fmt::format("step {}: {}", step, ToJson(out).dump()));
    }
  }
  ag::Backward(ag::Add(losses.total, penalty));
  out.grad_norm = optimizer.Step(params.Named());
  return out;
}

std::int64_t TotalSteps(const TrainConfig& config, const TrainingData& data) {
  const int p = std::min<int>(config.classes_per_batch, static_cast<int>(data.class_names.size()));
  const std::int64_t per_batch = static_cast<std::int64_t>(p) * config.per_class();
  const std::int64_t per_epoch = (static_cast<std::int64_t>(data.sketches.size()) + per_batch - 1) / per_batch;
  std::int64_t total = per_epoch * config.epochs;
  if (config.max_steps > 0) total = std::min<std::int64_t>(total, config.max_steps);
  return total;
}

FitResult Fit(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split, const TrainConfig& config,
              const FitOptions& options) {
  const Assets assets = MakeAssets(config);
  const Embedder embedder(config, *assets.backbone, *assets.encoder, *assets.captioner);
  return Fit(manifest, split, embedder, options);
}

FitResult Fit(const dataset::DatasetManifest& manifest, const dataset::SplitSpec& split, const Embedder& embedder,
              const FitOptions& options) {
  const TrainConfig& config = embedder.config();
  const std::uint64_t manifest_hash = dataset::ManifestHash(manifest);
  FitResult result;
  result.backbone_checksum_before = embedder.backbone().WeightChecksum();

  const TrainingData data = PrepareTrainingData(manifest, split, embedder);
  ModelParams params = embedder.InitParams(data.class_names);
  AdamW optimizer({config.learning_rate, config.weight_decay, config.adam_beta1, config.adam_beta2, config.adam_eps,
                   config.grad_clip});
  std::int64_t start = 0;
  if (options.resume) {
    const CheckpointBundle ckpt = LoadCheckpoint(*options.resume);
    if (ckpt.manifest_hash != manifest_hash) {
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint was trained on a different manifest");
    }
    if (ckpt.backbone_checksum != result.backbone_checksum_before) {
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint was trained against different backbone weights");
    }
    if (ResumeInvariant(nlohmann::json::parse(ckpt.config_json)) != ResumeInvariant(nlohmann::json(config))) {
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint config differs from the resume config");
    }
    if (ckpt.class_names != data.class_names) throw Error(ErrorCode::kCheckpointCorrupt, "class list differs");
    RestoreParams(ckpt, params);
    optimizer.Restore(ckpt.optimizer_steps, ckpt.moments);
    start = ckpt.step;
    spdlog::info("resuming {} at step {}", config.name, start);
  }

  const auto run_dir = config.run_dir();
  const auto trace_path = run_dir / kTraceFile;
  std::ofstream trace;
  if (options.write_files) {
    std::filesystem::create_directories(run_dir);
    if (options.resume) {
      RewriteTrace(trace_path, start);
    } else {
      std::filesystem::remove(trace_path);
    }
    trace.open(trace_path, std::ios::app);
  }
  auto checkpoint = [&](std::int64_t step) {
    const auto path = run_dir / CheckpointFileName(step);
    SaveCheckpoint(path, Capture(params, optimizer, step, config, manifest_hash, result.backbone_checksum_before));
    return path;
  };

  const std::int64_t total = TotalSteps(config, data);
  for (std::int64_t step = start; step < total; ++step) {
    auto rng = StepRng(config.seed, step, "batch");
    const TrainBatch batch = BuildBatch(data, config.classes_per_batch, config.per_class(), rng);
    const StepLosses l = TrainStep(embedder, data, batch, params, optimizer, step);
    result.trace.push_back(l);
    if (trace.is_open()) trace << ToJson(l).dump() << "\n" << std::flush;
    if (options.on_step) options.on_step(l);
    spdlog::debug("step {} total {:.6f} ske {:.6f} view {:.6f} cls {:.6f}", step, l.total, l.ske, l.view, l.cls_view);
    if (options.write_files && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 &&
        step + 1 < total) {
      checkpoint(step + 1);
    }
  }
  const std::int64_t done = std::max(start, total);
  result.final = Capture(params, optimizer, done, config, manifest_hash, result.backbone_checksum_before);
  if (options.write_files) result.final_checkpoint = checkpoint(done);
  result.backbone_checksum_after = embedder.backbone().WeightChecksum();
  return result;
}

std::vector<StepLosses> ReadLossTrace(const std::filesystem::path& path) {
  std::vector<StepLosses> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(StepLossesFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return out;
}

}  // namespace sbsr::trainer
