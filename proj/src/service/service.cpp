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

#include "sbsr/service/service.hpp"

#include <fmt/core.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <cctype>
#include <charconv>
#include <set>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/io.hpp"
#include "sbsr/conditioning/captioner.hpp"

namespace sbsr::service {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double Millis(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

std::string DecodeBase64(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/') {
      clean.push_back(c);
    } else if (c == '=' || std::isspace(static_cast<unsigned char>(c))) {
      continue;
    } else {
      throw RequestError(400, "payload is not valid base64");
    }
  }
  // binary_from_base64 needs whole 4-char groups; pad with 'A' and trim.
  const std::size_t rem = clean.size() % 4;
  if (rem == 1) throw RequestError(400, "payload is not valid base64");
  const std::size_t out_size = clean.size() * 3 / 4;
  if (rem != 0) clean.append(4 - rem, 'A');
  using It = boost::archive::iterators::transform_width<
      boost::archive::iterators::binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string out(It(clean.cbegin()), It(clean.cend()));
  out.resize(out_size);
  return out;
}

std::optional<int> ParseK(const httplib::Request& req) {
  if (!req.has_param("k")) return std::nullopt;
  const std::string v = req.get_param_value("k");
  int k = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw RequestError(422, "k must be an integer");
  return k;
}

// Multipart field "image", a JSON body {"image": "<base64 or data URL>"},
// a text body of base64, or raw image bytes.
std::string ExtractImageBytes(const httplib::Request& req) {
  if (req.is_multipart_form_data()) {
    if (!req.has_file("image")) throw RequestError(400, "multipart request lacks an 'image' field");
    return req.get_file_value("image").content;
  }
  const std::string type = req.get_header_value("Content-Type");
  auto from_text = [](std::string_view text) {
    if (text.starts_with("data:")) {
      const auto comma = text.find(',');
      if (comma == std::string_view::npos) throw RequestError(400, "malformed data URL");
      text.remove_prefix(comma + 1);
    }
    return DecodeBase64(text);
  };
  if (type.starts_with("application/json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      throw RequestError(400, "body is not valid JSON");
    }
    if (!j.contains("image") || !j["image"].is_string()) throw RequestError(400, "JSON body lacks an 'image' string");
    return from_text(j["image"].get<std::string>());
  }
  if (type.starts_with("text/plain")) return from_text(req.body);
  return req.body;
}

void ApplyCors(const RetrievalService& service, const httplib::Request& req, httplib::Response& res) {
  const std::string origin = req.get_header_value("Origin");
  if (origin.empty()) return;
  const auto& allow = service.config().cors_allowlist;
  if (std::find(allow.begin(), allow.end(), origin) != allow.end() ||
      std::find(allow.begin(), allow.end(), "*") != allow.end()) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Vary", "Origin");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  }
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}, {"status", status}}.dump(), "application/json");
}

std::string FileDigest(const fs::path& path) { return HexDigest(Fnv1a64(ReadFile(path))); }

}  // namespace

void to_json(nlohmann::json& j, const ServiceConfig& c) {
  j = {{"host", c.host},
       {"port", c.port},
       {"checkpoint", c.checkpoint.string()},
       {"index", c.index.string()},
       {"manifest", c.manifest.string()},
       {"k_default", c.k_default},
       {"backbone_profile", c.backbone_profile},
       {"cors_allowlist", c.cors_allowlist},
       {"queue_depth", c.queue_depth},
       {"deadline_ms", c.deadline_ms},
       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, ServiceConfig& c) {
  const ServiceConfig d;
  c.host = j.value("host", d.host);
  c.port = j.value("port", d.port);
  c.checkpoint = j.at("checkpoint").get<std::string>();
  c.index = j.at("index").get<std::string>();
  c.manifest = j.at("manifest").get<std::string>();
  c.k_default = j.value("k_default", d.k_default);
  c.backbone_profile = j.value("backbone_profile", d.backbone_profile);
  c.cors_allowlist = j.value("cors_allowlist", d.cors_allowlist);
  c.queue_depth = j.value("queue_depth", d.queue_depth);
  c.deadline_ms = j.value("deadline_ms", d.deadline_ms);
  c.threads = j.value("threads", d.threads);
}

ServiceConfig LoadServiceConfig(const fs::path& path) {
  ServiceConfig c;
  try {
    c = nlohmann::json::parse(ReadFile(path)).get<ServiceConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
  const fs::path base = path.parent_path();
  for (fs::path* p : {&c.checkpoint, &c.index, &c.manifest}) {
    if (p->is_relative()) *p = base / *p;
  }
  return c;
}

nlohmann::json ToJson(const RetrieveResponse& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"shape_id", e.shape_id},
                       {"category", e.category},
                       {"score", e.score},
                       {"thumbnail_url", e.thumbnail_url},
                       {"view_urls", e.view_urls}});
  }
  return {{"query_token", r.query_token},
          {"entries", std::move(entries)},
          {"timing",
           {{"queue_ms", r.timing.queue_ms},
            {"embed_ms", r.timing.embed_ms},
            {"rank_ms", r.timing.rank_ms},
            {"serialize_ms", r.timing.serialize_ms}}}};
}

std::string QueryItemId(const Image& image) {
  const auto bytes = std::as_bytes(std::span(image.pixels));
  const std::uint64_t h = Fnv1a64Bytes(bytes, HashCombine(image.width, image.height));
  return "query:" + HexDigest(h);
}

std::string UrlEncode(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

std::string ThumbnailUrl(std::string_view shape_id, int view) {
  return fmt::format("/api/shapes/{}/views/{}", UrlEncode(shape_id), view);
}

RetrievalService::~RetrievalService() = default;

std::unique_ptr<RetrievalService> RetrievalService::Load(const ServiceConfig& config) {
  std::vector<std::string> missing;
  for (const auto& [what, p] : {std::pair{"checkpoint", config.checkpoint}, std::pair{"index", config.index},
                                std::pair{"manifest", config.manifest}}) {
    if (p.empty() || !fs::is_regular_file(p)) missing.push_back(fmt::format("{} '{}'", what, p.string()));
  }
  if (!missing.empty()) {
    std::string msg = "missing service assets:";
    for (const auto& m : missing) msg += " " + m + ";";
    throw Error(ErrorCode::kIoError, msg);
  }
  if (config.k_default < 1) throw Error(ErrorCode::kInvalidArgument, "k_default must be at least 1");
  if (config.backbone_profile != "mock" && config.backbone_profile != "real") {
    throw Error(ErrorCode::kInvalidArgument, "backbone_profile must be 'mock' or 'real'");
  }

  std::unique_ptr<RetrievalService> s(new RetrievalService());
  s->config_ = config;
  s->gate_ = std::make_unique<BackboneGate>(config.queue_depth, std::chrono::milliseconds(config.deadline_ms));
  s->manifest_ = dataset::ReadManifestFile(config.manifest);
  const auto checkpoint = trainer::LoadCheckpoint(config.checkpoint);
  const auto store = aggregation::ReadEmbeddingStore(config.index);

  const std::uint64_t manifest_hash = dataset::ManifestHash(s->manifest_);
  const std::uint64_t checkpoint_hash = trainer::CheckpointHash(checkpoint);
  if (store.modality != aggregation::Modality::kShape) {
    throw Error(ErrorCode::kIncompatibleAssets, "index does not hold shape embeddings");
  }
  if (store.manifest_hash != manifest_hash) {
    throw Error(ErrorCode::kIncompatibleAssets,
                fmt::format("index was built for manifest {}, service manifest is {}", HexDigest(store.manifest_hash),
                            HexDigest(manifest_hash)));
  }
  if (checkpoint.manifest_hash != manifest_hash) {
    throw Error(ErrorCode::kIncompatibleAssets,
                fmt::format("checkpoint was trained on manifest {}, service manifest is {}",
                            HexDigest(checkpoint.manifest_hash), HexDigest(manifest_hash)));
  }
  if (store.checkpoint_hash != checkpoint_hash) {
    throw Error(ErrorCode::kIncompatibleAssets,
                fmt::format("index was embedded with checkpoint {}, service checkpoint is {}",
                            HexDigest(store.checkpoint_hash), HexDigest(checkpoint_hash)));
  }

  s->model_ = trainer::LoadModel(checkpoint, config.backbone_profile == "mock" ? "mock" : "");
  s->index_ = eval::EmbeddingIndex::FromStore(store);

  for (const auto& id : s->index_.ids()) {
    const auto* shape = s->manifest_.FindShape(id);
    if (!shape) throw Error(ErrorCode::kIncompatibleAssets, "index id " + id + " is not in the manifest");
    s->categories_[id] = shape->category;
    auto& views = s->views_[id];
    const auto keep = std::min<std::size_t>(shape->view_uris.size(), static_cast<std::size_t>(s->model_.config.top_k_views));
    for (std::size_t v = 0; v < keep; ++v) {
      const fs::path uri = shape->view_uris[v];
      if (!fs::is_regular_file(uri)) throw Error(ErrorCode::kIoError, "missing view image " + uri.string());
      views.push_back(ReadFile(uri));
    }
  }
  s->checkpoint_hash_ = HexDigest(checkpoint_hash);
  s->index_hash_ = FileDigest(config.index);
  s->manifest_hash_ = HexDigest(manifest_hash);
  spdlog::info("service ready: {} gallery shapes, checkpoint {}, index {}", s->index_.size(), s->checkpoint_hash_,
               s->index_hash_);
  return s;
}

RowVector RetrievalService::EmbedQuery(const Image& image) const {
  const std::string caption = model_.assets.captioner->Caption(image, conditioning::Modality::kSketch, "");
  const auto item = model_.embedder->Prepare(QueryItemId(image), image, caption);
  return model_.embedder->EvalSketch(item, model_.params);
}

RetrieveResponse RetrievalService::Retrieve(const Image& image, std::optional<int> k, std::string token) const {
  const int kk = k.value_or(std::min<int>(config_.k_default, static_cast<int>(index_.size())));
  if (kk < 1 || static_cast<std::size_t>(kk) > index_.size()) {
    throw RequestError(422, fmt::format("k must lie in [1, {}], got {}", index_.size(), kk));
  }
  RetrieveResponse r;
  r.query_token = token.empty() ? QueryItemId(image) : std::move(token);

  RowVector query;
  Clock::duration embed_time{};
  try {
    const auto waited = gate_->Run([&] {
      const auto t0 = Clock::now();
      query = EmbedQuery(image);
      embed_time = Clock::now() - t0;
    });
    r.timing.queue_ms = std::chrono::duration<double, std::milli>(waited).count();
  } catch (const GateBusy& e) {
    throw RequestError(503, e.what());
  }
  r.timing.embed_ms = Millis(embed_time);

  const auto t1 = Clock::now();
  const auto ranked = eval::Rank(query, index_, r.query_token);
  r.timing.rank_ms = Millis(Clock::now() - t1);

  for (int i = 0; i < kk; ++i) {
    const auto row = static_cast<std::size_t>(ranked.rows[static_cast<std::size_t>(i)]);
    RetrieveEntry e;
    e.shape_id = index_.ids()[row];
    e.category = index_.labels()[row];
    e.score = ranked.scores[static_cast<std::size_t>(i)];
    const auto& views = views_.at(e.shape_id);
    for (std::size_t v = 0; v < views.size(); ++v) e.view_urls.push_back(ThumbnailUrl(e.shape_id, static_cast<int>(v)));
    e.thumbnail_url = e.view_urls.empty() ? std::string() : e.view_urls.front();
    r.entries.push_back(std::move(e));
  }
  return r;
}

RetrieveResponse RetrievalService::RetrieveBytes(std::string_view bytes, std::optional<int> k,
                                                 std::string token) const {
  if (bytes.empty()) throw RequestError(400, "empty image payload");
  Image image;
  try {
    image = DecodePng(bytes);
  } catch (const Error& e) {
    throw RequestError(400, fmt::format("undecodable image: {}", e.what()));
  }
  return Retrieve(image, k, std::move(token));
}

std::optional<std::string> RetrievalService::Thumbnail(const std::string& shape_id, int view) const {
  const auto it = views_.find(shape_id);
  if (it == views_.end() || view < 0 || static_cast<std::size_t>(view) >= it->second.size()) return std::nullopt;
  return it->second[static_cast<std::size_t>(view)];
}

nlohmann::json RetrievalService::Health() const {
  return {{"status", "ok"},
          {"checkpoint_hash", checkpoint_hash_},
          {"index_hash", index_hash_},
          {"manifest_hash", manifest_hash_},
          {"gallery_size", index_.size()},
          {"backbone_profile", config_.backbone_profile},
          {"resolution", model_.embedder->profile().resolution},
          {"queue_waiting", gate_->waiting()}};
}

void RegisterRoutes(httplib::Server& server, const RetrievalService& service) {
  const RetrievalService* svc = &service;
  server.Options(R"(/api/.*)", [svc](const httplib::Request& req, httplib::Response& res) {
    ApplyCors(*svc, req, res);
    res.status = 204;
  });
  server.Get("/api/health", [svc](const httplib::Request& req, httplib::Response& res) {
    ApplyCors(*svc, req, res);
    res.set_content(svc->Health().dump(), "application/json");
  });
  server.Post("/api/retrieve", [svc](const httplib::Request& req, httplib::Response& res) {
    ApplyCors(*svc, req, res);
    try {
      const auto k = ParseK(req);
      auto r = svc->RetrieveBytes(ExtractImageBytes(req), k, req.get_param_value("token"));
      const auto t0 = Clock::now();
      std::string body = ToJson(r).dump();
      r.timing.serialize_ms = Millis(Clock::now() - t0);
      // Re-serialize once so the timing block carries its own cost.
      body = ToJson(r).dump();
      res.set_content(body, "application/json");
    } catch (const RequestError& e) {
      SendError(res, e.status(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("retrieve failed: {}", e.what());
      SendError(res, 500, e.what());
    }
  });
  server.Get(R"(/api/shapes/(.+)/views/(\d+))", [svc](const httplib::Request& req, httplib::Response& res) {
    ApplyCors(*svc, req, res);
    int view = -1;
    const std::string n = req.matches[2];
    std::from_chars(n.data(), n.data() + n.size(), view);
    // The server has already percent-decoded the path.
    const auto bytes = svc->Thumbnail(req.matches[1], view);
    if (!bytes) {
      SendError(res, 404, "unknown shape or view");
      return;
    }
    res.set_header("Cache-Control", "public, max-age=3600");
    res.set_content(*bytes, "image/png");
  });
}

HttpServer::HttpServer(const RetrievalService& service) : server_(std::make_unique<httplib::Server>()) {
  const int threads = std::max(1, service.config().threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  RegisterRoutes(*server_, service);
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::kIoError, fmt::format("cannot bind {}:{}", host, port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpServer::Wait() {
  if (thread_.joinable()) thread_.join();
}

}  // namespace sbsr::service
