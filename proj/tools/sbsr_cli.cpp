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

// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/dataset/render.hpp"
#include "sbsr/dataset/split.hpp"
#include "sbsr/dataset/synthetic.hpp"
#include "sbsr/eval/report.hpp"
#include "sbsr/service/service.hpp"
#include "sbsr/trainer/trainer.hpp"
#include "sbsr/viewselect/selection.hpp"

namespace fs = std::filesystem;
using namespace sbsr;

namespace {

service::HttpServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

dataset::SplitSpec LoadOrMakeSplit(const std::string& arg, const dataset::DatasetManifest& manifest) {
  if (fs::is_regular_file(arg)) return dataset::ReadSplitFile(arg);
  return dataset::MakeSplit(manifest, dataset::ParseProtocol(arg));
}

std::optional<Image> TryRead(const std::string& uri) {
  if (uri.empty() || !fs::is_regular_file(uri)) return std::nullopt;
  return ReadPng(uri);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketch-based 3D shape retrieval toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // ingest
  std::string root, dataset_name, manifest_path = "manifest.jsonl";
  auto* ingest = app.add_subcommand("ingest", "scan a corpus directory into a manifest");
  ingest->add_option("--root", root, "corpus root")->required();
  ingest->add_option("--dataset", dataset_name, "dataset folder name (shrec13, shrec14, ...)")->required();
  ingest->add_option("--out", manifest_path, "manifest file to write");

  // synth
  std::uint64_t synth_seed = 11;
  int sketch_size = 64;
  auto* synth = app.add_subcommand("synth", "write the synthetic six-category corpus");
  synth->add_option("--root", root, "output root")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--sketch-size", sketch_size, "sketch side in pixels");

  // render
  int views = 12, size = 224;
  double elevation = 20.0;
  bool ortho = false;
  std::string view_dir;
  auto* render = app.add_subcommand("render", "render candidate views for every shape");
  render->add_option("--manifest", manifest_path, "manifest file (updated in place)")->required();
  render->add_option("--views", views, "views per shape");
  render->add_option("--elev", elevation, "camera elevation in degrees");
  render->add_option("--size", size, "image side in pixels");
  render->add_flag("--ortho", ortho, "orthographic instead of perspective projection");
  render->add_option("--out-dir", view_dir, "view directory (default: <manifest dir>/views)");

  // select-views
  int top_k = 3;
  std::string fallback = "none", encoder_profile = "full";
  auto* select = app.add_subcommand("select-views", "keep the views closest to the category text anchor");
  select->add_option("--manifest", manifest_path, "manifest file (updated in place)")->required();
  select->add_option("--k", top_k, "views to keep");
  select->add_option("--fallback", fallback, "none | centrality for uncategorized shapes")
      ->check(CLI::IsMember({"none", "centrality"}));
  select->add_option("--profile", encoder_profile, "device profile whose encoder to use")
      ->check(CLI::IsMember({"full", "desk"}));

  // split
  std::string protocol = "split2", split_out = "split.json";
  bool apply_roles = true;
  auto* split_cmd = app.add_subcommand("split", "partition categories into seen and unseen");
  split_cmd->add_option("--manifest", manifest_path, "manifest file")->required();
  split_cmd->add_option("--protocol", protocol, "split1 | split2")->check(CLI::IsMember({"split1", "split2"}));
  split_cmd->add_option("--out", split_out, "split file to write");
  split_cmd->add_option("--apply-roles", apply_roles, "mark unseen-category sketches as test in the manifest");

  // train
  std::string config_path, split_arg = "split.json", resume;
  bool mock_backbone = false;
  int max_steps = -1;
  auto* train = app.add_subcommand("train", "fit conditioning, aggregation and head");
  train->add_option("--config", config_path, "training config JSON")->required();
  train->add_option("--manifest", manifest_path, "manifest file");
  train->add_option("--split", split_arg, "split file, or a protocol name to compute one");
  train->add_flag("--mock-backbone", mock_backbone, "use the deterministic mock backbone");
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_option("--max-steps", max_steps, "override the step cap");

  // embed
  std::string ckpt, out_path = "index.bin", modality = "shape", embed_split;
  auto* embed = app.add_subcommand("embed", "embed gallery shapes (or sketches) into an index");
  embed->add_option("--ckpt", ckpt, "checkpoint")->required();
  embed->add_option("--manifest", manifest_path, "manifest file");
  embed->add_option("--out", out_path, "embedding store to write");
  embed->add_option("--modality", modality, "shape | sketch")->check(CLI::IsMember({"shape", "sketch"}));
  embed->add_option("--split", embed_split, "restrict to unseen categories of this split (default: all)");

  // evaluate
  std::string report_dir = "report", cache_dir;
  auto* evaluate = app.add_subcommand("evaluate", "zero-shot retrieval metrics");
  evaluate->add_option("--ckpt", ckpt, "checkpoint")->required();
  evaluate->add_option("--manifest", manifest_path, "manifest file");
  evaluate->add_option("--split", split_arg, "split file, or split1 | split2");
  evaluate->add_option("--report", report_dir, "output directory");
  evaluate->add_option("--cache", cache_dir, "feature cache directory");

  // report
  std::string rankings_path, heatmap_path, montage_path;
  int montage_k = 5, montage_rows = 0, thumb = 64;
  auto* report = app.add_subcommand("report", "render heatmap and montage images from rankings");
  report->add_option("--rankings", rankings_path, "rankings.json from evaluate")->required();
  report->add_option("--manifest", manifest_path, "manifest file (for thumbnails)");
  report->add_option("--heatmap", heatmap_path, "confusion heatmap PNG to write");
  report->add_option("--montage", montage_path, "retrieval montage PNG to write");
  report->add_option("--k", montage_k, "gallery thumbnails per montage row");
  report->add_option("--rows", montage_rows, "limit montage to the first N queries (0 = all)");
  report->add_option("--thumb", thumb, "thumbnail side in pixels");

  // serve
  std::string service_config;
  auto* serve = app.add_subcommand("serve", "HTTP retrieval service");
  serve->add_option("--config", service_config, "service config JSON")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*ingest) {
      auto m = dataset::LoadManifest(root, dataset_name);
      dataset::WriteManifestFile(manifest_path, m);
      fmt::print("{}: {} categories, {} shapes, {} sketches -> {}\n", m.dataset_name, m.categories.size(),
                 m.shapes.size(), m.sketches.size(), manifest_path);
    } else if (*synth) {
      auto spec = dataset::DefaultSyntheticSpec();
      spec.seed = synth_seed;
      spec.sketch_size = sketch_size;
      dataset::GenerateSyntheticDataset(root, spec);
      fmt::print("wrote {}/{}\n", root, spec.dataset_name);
    } else if (*render) {
      auto m = dataset::ReadManifestFile(manifest_path);
      const fs::path dir = view_dir.empty() ? fs::path(manifest_path).parent_path() / "views" : fs::path(view_dir);
      dataset::RenderManifest(m, dataset::MakeRig(views, elevation, size,
                                                  ortho ? dataset::Projection::kOrthographic
                                                        : dataset::Projection::kPerspective),
                              dir);
      dataset::WriteManifestFile(manifest_path, m);
      fmt::print("rendered {} views for {} shapes into {}\n", views, m.shapes.size(), dir.string());
    } else if (*select) {
      auto m = dataset::ReadManifestFile(manifest_path);
      const auto profile = trainer::ProfileByName(encoder_profile);
      const auto encoder = vl::MakeVisionLanguageEncoder("mock", profile.encoder);
      viewselect::SelectViewsForManifest(
          m, *encoder, top_k, fallback == "centrality" ? viewselect::Fallback::kCentrality : viewselect::Fallback::kNone);
      dataset::WriteManifestFile(manifest_path, m);
      fmt::print("kept top-{} views for {} shapes\n", top_k, m.shapes.size());
    } else if (*split_cmd) {
      auto m = dataset::ReadManifestFile(manifest_path);
      const auto s = dataset::MakeSplit(m, dataset::ParseProtocol(protocol));
      dataset::WriteSplitFile(split_out, s);
      if (apply_roles) {
        dataset::ApplyZeroShotRoles(m, s);
        dataset::WriteManifestFile(manifest_path, m);
      }
      fmt::print("{}: {} seen, {} unseen -> {}\n", protocol, s.seen_categories.size(), s.unseen_categories.size(),
                 split_out);
    } else if (*train) {
      auto config = trainer::LoadTrainConfig(config_path);
      if (mock_backbone) config.backbone = "mock";
      if (max_steps >= 0) config.max_steps = max_steps;
      const auto m = dataset::ReadManifestFile(manifest_path);
      const auto s = LoadOrMakeSplit(split_arg, m);
      trainer::FitOptions options;
      if (!resume.empty()) options.resume = resume;
      options.on_step = [](const trainer::StepLosses& l) {
        spdlog::info("step {} total {:.5f} ske {:.5f} view {:.5f} cls {:.5f}", l.step, l.total, l.ske, l.view,
                     l.cls_view);
      };
      const auto result = trainer::Fit(m, s, config, options);
      if (result.backbone_checksum_before != result.backbone_checksum_after) {
        throw Error(ErrorCode::kIncompatibleAssets, "backbone weights changed during training");
      }
      fmt::print("trained to step {}; checkpoint {}\n", result.final.step,
                 result.final_checkpoint ? result.final_checkpoint->string() : std::string("(not written)"));
    } else if (*embed) {
      const auto bundle = trainer::LoadCheckpoint(ckpt);
      const auto model = trainer::LoadModel(bundle);
      const auto m = dataset::ReadManifestFile(manifest_path);
      std::set<std::string> categories(m.categories.begin(), m.categories.end());
      if (!embed_split.empty()) categories = LoadOrMakeSplit(embed_split, m).unseen_categories;
      auto store = modality == "shape" ? eval::EmbedGallery(m, categories, *model.embedder, model.params)
                                       : eval::EmbedQueries(m, categories, *model.embedder, model.params);
      store.checkpoint_hash = trainer::CheckpointHash(bundle);
      aggregation::WriteEmbeddingStore(out_path, store);
      fmt::print("embedded {} {} items -> {}\n", store.size(), modality, out_path);
    } else if (*evaluate) {
      const auto bundle = trainer::LoadCheckpoint(ckpt);
      const auto model = trainer::LoadModel(bundle);
      const auto m = dataset::ReadManifestFile(manifest_path);
      const auto s = LoadOrMakeSplit(split_arg, m);
      eval::EvaluationOptions options;
      if (!cache_dir.empty()) options.cache_dir = cache_dir;
      const auto ev = eval::Evaluate(bundle, m, s, *model.embedder, options);
      const nlohmann::json provenance = {{"checkpoint", ckpt},
                                         {"checkpoint_hash", HexDigest(trainer::CheckpointHash(bundle))},
                                         {"manifest_hash", HexDigest(dataset::ManifestHash(m))},
                                         {"protocol", std::string(dataset::ToString(s.protocol))},
                                         {"unseen_categories", s.unseen_categories}};
      eval::EmitReport(report_dir, ev, provenance);
      const auto& r = ev.report;
      fmt::print("queries {}  NN {:.4f}  FT {:.4f}  ST {:.4f}  E {:.4f}  DCG {:.4f}  MRR {:.4f}  mAP {:.4f}\n",
                 r.query_count, r.nn, r.ft, r.st, r.e, r.dcg, r.mrr, r.map);
      fmt::print("report -> {}/report.json\n", report_dir);
    } else if (*report) {
      auto rankings = eval::ReadRankings(rankings_path);
      if (!heatmap_path.empty()) {
        WritePng(heatmap_path, eval::RenderHeatmap(eval::TopOneConfusion(rankings)));
        fmt::print("heatmap -> {}\n", heatmap_path);
      }
      if (!montage_path.empty()) {
        if (montage_rows > 0 && static_cast<std::size_t>(montage_rows) < rankings.size()) rankings.resize(montage_rows);
        std::optional<dataset::DatasetManifest> m;
        if (fs::is_regular_file(manifest_path)) m = dataset::ReadManifestFile(manifest_path);
        auto queries = [&](const std::string& id) -> std::optional<Image> {
          const auto* s = m ? m->FindSketch(id) : nullptr;
          return s ? TryRead(s->image_uri) : std::nullopt;
        };
        auto gallery = [&](const std::string& id) -> std::optional<Image> {
          const auto* s = m ? m->FindShape(id) : nullptr;
          return s && !s->view_uris.empty() ? TryRead(s->view_uris.front()) : std::nullopt;
        };
        WritePng(montage_path, eval::RenderMontage(rankings, montage_k, queries, gallery, thumb).image);
        fmt::print("montage -> {}\n", montage_path);
      }
    } else if (*serve) {
      const auto config = service::LoadServiceConfig(service_config);
      const auto svc = service::RetrievalService::Load(config);
      service::HttpServer server(*svc);
      g_server = &server;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      const int port = server.Start(config.host, config.port);
      fmt::print("listening on http://{}:{}\n", config.host, port);
      std::fflush(stdout);
      server.Wait();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    spdlog::error("{}: {}", ToString(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
