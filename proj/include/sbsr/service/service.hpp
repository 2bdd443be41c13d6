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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbsr/dataset/manifest.hpp"
#include "sbsr/eval/index.hpp"
#include "sbsr/service/gate.hpp"
#include "sbsr/trainer/checkpoint.hpp"

namespace httplib {
class Server;
}

namespace sbsr::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path checkpoint;
  std::filesystem::path index;
  std::filesystem::path manifest;
  int k_default = 10;
  // "mock" or "real"; "real" uses the backbone named in the checkpoint config.
  std::string backbone_profile = "mock";
  std::vector<std::string> cors_allowlist;
  int queue_depth = 8;
  int deadline_ms = 30000;
  int threads = 8;
};

void to_json(nlohmann::json& j, const ServiceConfig& c);
void from_json(const nlohmann::json& j, ServiceConfig& c);
// Relative asset paths resolve against the config file's directory.
ServiceConfig LoadServiceConfig(const std::filesystem::path& path);

struct RetrieveEntry {
  std::string shape_id;
  std::string category;
  double score = 0.0;
  std::string thumbnail_url;
  std::vector<std::string> view_urls;
};

struct RetrieveTiming {
  double queue_ms = 0.0;
  double embed_ms = 0.0;
  double rank_ms = 0.0;
  double serialize_ms = 0.0;
};

struct RetrieveResponse {
  std::string query_token;
  std::vector<RetrieveEntry> entries;
  RetrieveTiming timing;
};

nlohmann::json ToJson(const RetrieveResponse& r);

// Failure carrying the HTTP status the handler should answer with.
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Item id for an uploaded sketch: a digest of its pixels, so the noise seed
// and therefore the embedding depend only on the image.
std::string QueryItemId(const Image& image);

// Loaded assets and the request logic, independent of the transport.
class RetrievalService {
 public:
  // Throws Error(IoError) naming every missing asset, or IncompatibleAssets
  // when the checkpoint, index and manifest do not belong together.
  static std::unique_ptr<RetrievalService> Load(const ServiceConfig& config);

  // Embeds a decoded image and ranks the gallery. RequestError 422 for k out
  // of range, 503 when the backbone gate rejects the request.
  RetrieveResponse Retrieve(const Image& image, std::optional<int> k, std::string token = {}) const;

  // Decodes PNG bytes first; RequestError 400 when undecodable.
  RetrieveResponse RetrieveBytes(std::string_view bytes, std::optional<int> k, std::string token = {}) const;

  // Embedding only, through the same path Retrieve uses.
  RowVector EmbedQuery(const Image& image) const;

  // Encoded PNG for a selected view, or nullopt for an unknown id/view.
  std::optional<std::string> Thumbnail(const std::string& shape_id, int view) const;

  nlohmann::json Health() const;

  const eval::EmbeddingIndex& index() const { return index_; }
  const ServiceConfig& config() const { return config_; }
  const trainer::Embedder& embedder() const { return *model_.embedder; }
  const trainer::ModelParams& params() const { return model_.params; }
  BackboneGate& gate() const { return *gate_; }

  RetrievalService(const RetrievalService&) = delete;
  RetrievalService& operator=(const RetrievalService&) = delete;
  ~RetrievalService();

 private:
  RetrievalService() = default;

  ServiceConfig config_;
  dataset::DatasetManifest manifest_;
  trainer::LoadedModel model_;
  eval::EmbeddingIndex index_;
  std::map<std::string, std::vector<std::string>> views_;  // shape id -> selected view PNG bytes
  std::map<std::string, std::string> categories_;
  std::string checkpoint_hash_;
  std::string index_hash_;
  std::string manifest_hash_;
  std::unique_ptr<BackboneGate> gate_;
};

// Percent-encodes everything outside the URL unreserved set.
std::string UrlEncode(std::string_view text);
std::string ThumbnailUrl(std::string_view shape_id, int view);

// Routes: GET /api/health, POST /api/retrieve, GET /api/shapes/{id}/views/{n}.
void RegisterRoutes(httplib::Server& server, const RetrievalService& service);

// Owns an httplib server on a background thread.
class HttpServer {
 public:
  explicit HttpServer(const RetrievalService& service);
  ~HttpServer();

  // Binds (port 0 picks a free one) and starts listening; returns the port.
  int Start(const std::string& host, int port);
  void Stop();
  // Blocks until Stop is called from another thread or a signal handler.
  void Wait();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace sbsr::service
