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

#include <gtest/gtest.h>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include <atomic>
#include <future>
#include <thread>

#include "sbsr/core/error.hpp"
#include "sbsr/core/io.hpp"
#include "sbsr/service/gate.hpp"
#include "sbsr/service/service.hpp"
#include "support/test_support.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

namespace sbsr::service {
namespace {

using namespace std::chrono_literals;

std::string Base64(const std::string& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(Gate, SerializesFifo) {
  BackboneGate gate(8, 5000ms);
  std::atomic<int> inside{0};
  std::atomic<int> peak{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] {
      gate.Run([&] {
        peak = std::max(peak.load(), ++inside);
        std::this_thread::sleep_for(5ms);
        --inside;
      });
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(peak.load(), 1);
  EXPECT_EQ(gate.waiting(), 0);
}

TEST(Gate, RejectsWhenQueueFullOrDeadlinePasses) {
  BackboneGate gate(1, 50ms);
  std::promise<void> release;
  auto hold = release.get_future().share();
  std::thread holder([&] { gate.Run([&] { hold.wait(); }); });
  while (gate.waiting() != 0) std::this_thread::yield();
  std::this_thread::sleep_for(10ms);
  // One waiter fits and times out; with it queued, another is turned away.
  auto waiter = std::async(std::launch::async, [&] {
    try {
      gate.Run([] {});
      return false;
    } catch (const GateBusy&) {
      return true;
    }
  });
  while (gate.waiting() != 1) std::this_thread::yield();
  EXPECT_THROW(gate.Run([] {}), GateBusy);
  EXPECT_TRUE(waiter.get());
  release.set_value();
  holder.join();
  // Abandoned tickets do not block later callers.
  EXPECT_NO_THROW(gate.Run([] {}));
}

TEST(Urls, EncodingAndThumbnailPath) {
  EXPECT_EQ(UrlEncode("chair:m 1/x"), "chair%3Am%201%2Fx");
  EXPECT_EQ(UrlEncode("a-b_c.d~"), "a-b_c.d~");
  EXPECT_EQ(ThumbnailUrl("box:3", 2), "/api/shapes/box%3A3/views/2");
}

TEST(QueryId, DependsOnPixelsOnly) {
  Image a(8, 8, 10), b(8, 8, 10), c(8, 8, 11);
  EXPECT_EQ(QueryItemId(a), QueryItemId(b));
  EXPECT_NE(QueryItemId(a), QueryItemId(c));
  EXPECT_NE(QueryItemId(Image(4, 16, 10)), QueryItemId(a));
  EXPECT_EQ(QueryItemId(a).rfind("query:", 0), 0u);
}

TEST(ServiceConfig, RelativePathsResolveAgainstConfigDir) {
  testing::TempDir dir("svc-config");
  WriteFileAtomic(dir / "svc.json", R"({"checkpoint": "a.ckpt", "index": "/abs/i.emb", "manifest": "m.jsonl",
                                        "k_default": 3, "cors_allowlist": ["http://x"]})");
  const auto c = LoadServiceConfig(dir / "svc.json");
  EXPECT_EQ(c.checkpoint, dir / "a.ckpt");
  EXPECT_EQ(c.index, "/abs/i.emb");
  EXPECT_EQ(c.k_default, 3);
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.cors_allowlist, std::vector<std::string>{"http://x"});
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("service");
    fixture_ = new testing::PipelineFixture(testing::BuildPipeline(dir_->path()));
    auto train = testing::TinyTrainConfig(dir_->path() / "runs");
    train.max_steps = 2;
    config_ = new ServiceConfig(testing::BuildServiceAssets(dir_->path() / "assets", *fixture_, train));
    config_->k_default = 5;
    config_->cors_allowlist = {"http://allowed.example"};
    service_ = RetrievalService::Load(*config_).release();
    server_ = new HttpServer(*service_);
    port_ = server_->Start("127.0.0.1", 0);
  }
  static void TearDownTestSuite() {
    delete server_;
    delete service_;
    delete config_;
    delete fixture_;
    delete dir_;
  }

  static httplib::Client Client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }
  static const dataset::SketchRecord& Sketch(std::size_t i) { return fixture_->manifest.sketches[i]; }
  static std::string SketchBytes(std::size_t i) { return ReadFile(Sketch(i).image_uri); }

  static testing::TempDir* dir_;
  static testing::PipelineFixture* fixture_;
  static ServiceConfig* config_;
  static RetrievalService* service_;
  static HttpServer* server_;
  static int port_;
};
testing::TempDir* ServiceTest::dir_ = nullptr;
testing::PipelineFixture* ServiceTest::fixture_ = nullptr;
ServiceConfig* ServiceTest::config_ = nullptr;
RetrievalService* ServiceTest::service_ = nullptr;
HttpServer* ServiceTest::server_ = nullptr;
int ServiceTest::port_ = 0;

TEST_F(ServiceTest, Health) {
  auto res = Client().Get("/api/health");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("gallery_size"), 18);
  EXPECT_EQ(j.at("backbone_profile"), "mock");
  EXPECT_EQ(j.at("resolution"), 32);
  EXPECT_EQ(j.at("index_hash").get<std::string>().size(), 16u);
}

TEST_F(ServiceTest, RetrieveMatchesOfflineRanking) {
  const auto bundle = trainer::LoadCheckpoint(config_->checkpoint);
  const auto model = trainer::LoadModel(bundle);
  const auto index = eval::EmbeddingIndex::FromStore(aggregation::ReadEmbeddingStore(config_->index));
  for (std::size_t i = 0; i < 4; ++i) {
    const Image img = ReadPng(Sketch(i).image_uri);
    const auto item = model.embedder->Prepare(QueryItemId(img), img, "a sketch of");
    const auto offline = eval::Rank(model.embedder->EvalSketch(item, model.params), index);
    auto res = Client().Post("/api/retrieve?k=18", SketchBytes(i), "image/png");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const auto j = nlohmann::json::parse(res->body);
    const auto& results = j.at("entries");
    ASSERT_EQ(results.size(), 18u);
    for (std::size_t r = 0; r < 18; ++r) {
      EXPECT_EQ(results[r].at("shape_id"), index.ids()[static_cast<std::size_t>(offline.rows[r])]);
      EXPECT_NEAR(results[r].at("score").get<double>(), offline.scores[r], 1e-9);
    }
  }
}

TEST_F(ServiceTest, DefaultKAndResponseShape) {
  auto res = Client().Post("/api/retrieve?token=abc", SketchBytes(0), "application/octet-stream");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j.at("query_token"), "abc");
  ASSERT_EQ(j.at("entries").size(), 5u);
  const auto& top = j.at("entries")[0];
  const std::string id = top.at("shape_id");
  EXPECT_EQ(top.at("category"), fixture_->manifest.FindShape(id)->category);
  EXPECT_EQ(top.at("thumbnail_url"), ThumbnailUrl(id, 0));
  EXPECT_EQ(top.at("view_urls").size(), 3u);
  for (const char* key : {"queue_ms", "embed_ms", "rank_ms", "serialize_ms"}) {
    EXPECT_GE(j.at("timing").at(key).get<double>(), 0.0);
  }
  const auto one = Client().Post("/api/retrieve?k=1", SketchBytes(0), "image/png");
  EXPECT_EQ(nlohmann::json::parse(one->body).at("entries").size(), 1u);
  EXPECT_EQ(nlohmann::json::parse(one->body).at("entries")[0].at("shape_id"), id);
}

TEST_F(ServiceTest, PayloadEncodings) {
  const std::string png = SketchBytes(1);
  const auto raw = nlohmann::json::parse(Client().Post("/api/retrieve?k=3", png, "image/png")->body).at("entries");
  auto same = [&](const httplib::Result& res) {
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    EXPECT_EQ(nlohmann::json::parse(res->body).at("entries"), raw);
  };
  same(Client().Post("/api/retrieve?k=3", nlohmann::json{{"image", Base64(png)}}.dump(), "application/json"));
  same(Client().Post("/api/retrieve?k=3", nlohmann::json{{"image", "data:image/png;base64," + Base64(png)}}.dump(),
                     "application/json"));
  same(Client().Post("/api/retrieve?k=3", Base64(png), "text/plain"));
  httplib::MultipartFormDataItems items{{"image", png, "sketch.png", "image/png"}};
  same(Client().Post("/api/retrieve?k=3", items));
}

TEST_F(ServiceTest, ErrorStatuses) {
  const std::string png = SketchBytes(0);
  EXPECT_EQ(Client().Post("/api/retrieve?k=0", png, "image/png")->status, 422);
  EXPECT_EQ(Client().Post("/api/retrieve?k=19", png, "image/png")->status, 422);
  EXPECT_EQ(Client().Post("/api/retrieve?k=two", png, "image/png")->status, 422);
  EXPECT_EQ(Client().Post("/api/retrieve", "", "image/png")->status, 400);
  EXPECT_EQ(Client().Post("/api/retrieve", "not an image", "image/png")->status, 400);
  EXPECT_EQ(Client().Post("/api/retrieve", "{\"img\": 1}", "application/json")->status, 400);
  EXPECT_EQ(Client().Post("/api/retrieve", "{oops", "application/json")->status, 400);
  httplib::MultipartFormDataItems items{{"file", png, "sketch.png", "image/png"}};
  EXPECT_EQ(Client().Post("/api/retrieve", items)->status, 400);
  const auto bad = Client().Post("/api/retrieve", "", "image/png");
  EXPECT_TRUE(nlohmann::json::parse(bad->body).contains("error"));
}

TEST_F(ServiceTest, Thumbnails) {
  const std::string id = fixture_->manifest.shapes[2].shape_id;
  auto a = Client().Get(ThumbnailUrl(id, 1));
  auto b = Client().Get(ThumbnailUrl(id, 1));
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(a->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(a->body, ReadFile(fixture_->manifest.shapes[2].view_uris[1]));
  EXPECT_EQ(Client().Get(ThumbnailUrl(id, 3))->status, 404);
  EXPECT_EQ(Client().Get(ThumbnailUrl("nope", 0))->status, 404);
}

TEST_F(ServiceTest, Cors) {
  httplib::Headers allowed{{"Origin", "http://allowed.example"}};
  auto res = Client().Get("/api/health", allowed);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://allowed.example");
  httplib::Headers other{{"Origin", "http://evil.example"}};
  EXPECT_FALSE(Client().Get("/api/health", other)->has_header("Access-Control-Allow-Origin"));
  auto pre = Client().Options("/api/retrieve", allowed);
  ASSERT_TRUE(pre);
  EXPECT_LT(pre->status, 300);
}

TEST_F(ServiceTest, ConcurrentRequestsAgree) {
  const std::string png = SketchBytes(2);
  const std::string expected =
      nlohmann::json::parse(Client().Post("/api/retrieve?k=4", png, "image/png")->body).at("entries").dump();
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 6; ++i) {
    futures.push_back(std::async(std::launch::async, [&] {
      auto res = Client().Post("/api/retrieve?k=4", png, "image/png");
      return res && res->status == 200 ? nlohmann::json::parse(res->body).at("entries").dump() : std::string("fail");
    }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get(), expected);
}

TEST_F(ServiceTest, DirectCallsAndBusyGate) {
  const Image img = ReadPng(Sketch(0).image_uri);
  try {
    service_->Retrieve(img, 0);
    FAIL();
  } catch (const RequestError& e) {
    EXPECT_EQ(e.status(), 422);
  }
  ServiceConfig tight = *config_;
  tight.queue_depth = 0;
  tight.deadline_ms = 1;
  const auto svc = RetrievalService::Load(tight);
  std::promise<void> release;
  auto hold = release.get_future().share();
  std::thread holder([&] { svc->gate().Run([&] { hold.wait(); }); });
  std::this_thread::sleep_for(20ms);
  try {
    svc->Retrieve(img, 1);
    ADD_FAILURE() << "expected 503";
  } catch (const RequestError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  release.set_value();
  holder.join();
  EXPECT_EQ(svc->Retrieve(img, 1).entries.size(), 1u);
}

TEST_F(ServiceTest, StartupChecks) {
  ServiceConfig missing = *config_;
  missing.checkpoint = dir_->path() / "none.ckpt";
  missing.index = dir_->path() / "none.emb";
  try {
    RetrievalService::Load(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("none.ckpt"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("none.emb"), std::string::npos);
  }
  // A manifest that differs from the one the index and checkpoint were built on.
  auto changed = fixture_->manifest;
  auto& flipped = changed.sketches.front().role;
  flipped = flipped == dataset::Role::kTrain ? dataset::Role::kTest : dataset::Role::kTrain;
  ServiceConfig other = *config_;
  other.manifest = dir_->path() / "other.jsonl";
  dataset::WriteManifestFile(other.manifest, changed);
  EXPECT_EQ(CodeOf([&] { RetrievalService::Load(other); }), ErrorCode::kIncompatibleAssets);
  // An index embedded with a different checkpoint.
  auto store = aggregation::ReadEmbeddingStore(config_->index);
  store.checkpoint_hash ^= 1;
  ServiceConfig stale = *config_;
  stale.index = dir_->path() / "stale.emb";
  aggregation::WriteEmbeddingStore(stale.index, store);
  EXPECT_EQ(CodeOf([&] { RetrievalService::Load(stale); }), ErrorCode::kIncompatibleAssets);
  store.checkpoint_hash ^= 1;
  store.modality = aggregation::Modality::kSketch;
  aggregation::WriteEmbeddingStore(stale.index, store);
  EXPECT_EQ(CodeOf([&] { RetrievalService::Load(stale); }), ErrorCode::kIncompatibleAssets);
}

}  // namespace
}  // namespace sbsr::service
