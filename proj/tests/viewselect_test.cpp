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

#include <random>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/dataset/render.hpp"
#include "sbsr/trainer/config.hpp"
#include "sbsr/viewselect/selection.hpp"
#include "sbsr/viewselect/vision_language.hpp"
#include "support/test_support.hpp"

namespace sbsr::viewselect {
namespace {

std::vector<ViewEmbedding> FromCosines(const std::vector<double>& cosines) {
  std::vector<ViewEmbedding> views;
  for (std::size_t i = 0; i < cosines.size(); ++i) {
    RowVector v(2);
    v << cosines[i], std::sqrt(1.0 - cosines[i] * cosines[i]);
    views.push_back({"s", static_cast<int>(i), v});
  }
  return views;
}

RowVector UnitX() {
  RowVector t(2);
  t << 1, 0;
  return t;
}

TEST(SelectTopK, WorkedExample) {
  const auto views = FromCosines({0.9, 0.1, 0.5, 0.8});
  const auto sel = SelectTopK(views, UnitX(), 3);
  EXPECT_EQ(sel.selected_indices, (std::vector<int>{0, 3, 2}));
  ASSERT_EQ(sel.scores.size(), 3u);
  EXPECT_NEAR(sel.scores[0], 0.9, 1e-12);
  EXPECT_NEAR(sel.scores[1], 0.8, 1e-12);
  EXPECT_NEAR(sel.scores[2], 0.5, 1e-12);
}

TEST(SelectTopK, TiesToLowerIndexAndClamping) {
  const auto views = FromCosines({0.3, 0.7, 0.7, 0.3});
  EXPECT_EQ(SelectTopK(views, UnitX(), 3).selected_indices, (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(SelectTopK(views, UnitX(), 10).selected_indices.size(), 4u);
  EXPECT_THROW(SelectTopK(views, UnitX(), 0), Error);
  EXPECT_THROW(SelectTopK({}, UnitX(), 3), Error);
}

TEST(SelectTopK, BruteForceAgreement) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> cos(12);
    for (auto& c : cos) c = u(rng);
    const auto sel = SelectTopK(FromCosines(cos), UnitX(), 3);
    // Brute force: the chosen three beat every unchosen view.
    for (std::size_t j = 0; j < cos.size(); ++j) {
      if (std::find(sel.selected_indices.begin(), sel.selected_indices.end(), static_cast<int>(j)) !=
          sel.selected_indices.end()) {
        continue;
      }
      for (int i : sel.selected_indices) EXPECT_GE(cos[static_cast<std::size_t>(i)], cos[j]);
    }
    EXPECT_TRUE(std::is_sorted(sel.scores.rbegin(), sel.scores.rend()));
  }
}

TEST(SelectByCentrality, PicksViewsNearTheMean) {
  std::vector<ViewEmbedding> views;
  for (int i = 0; i < 5; ++i) {
    RowVector v = RowVector::Zero(3);
    v(0) = 1.0;
    v(1) = i == 4 ? 10.0 : 0.1 * i;
    views.push_back({"s", i, v.normalized()});
  }
  const auto sel = SelectByCentrality(views, 2);
  EXPECT_EQ(std::find(sel.selected_indices.begin(), sel.selected_indices.end(), 4), sel.selected_indices.end());
}

TEST(AnchorPrompt, Format) { EXPECT_EQ(AnchorPrompt("airplane"), "a photo of airplane."); }

TEST(MockEncoder, TextEmbeddingOracle) {
  vl::MockVisionLanguageEncoder enc;
  const RowVector v = enc.EmbedText("a photo of chair.");
  std::mt19937_64 rng(Fnv1a64("a photo of chair."));
  std::normal_distribution<double> dist(0.0, 1.0);
  RowVector ref(enc.embedding_dim());
  for (Index i = 0; i < ref.size(); ++i) ref(i) = dist(rng);
  ref.normalize();
  EXPECT_LT((v - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MockEncoder, ImageEmbeddingOracle) {
  vl::MockVisionLanguageEncoder enc;
  Image img(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) img.Set(x, y, static_cast<std::uint8_t>(x * 16), static_cast<std::uint8_t>(y * 16), 7);
  }
  // At thumbnail size the resize is the identity; flatten RGB row-major.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  const int flat = 16 * 16 * 3;
  Matrix proj(flat, enc.embedding_dim());
  for (Index r = 0; r < proj.rows(); ++r) {
    for (Index c = 0; c < proj.cols(); ++c) proj(r, c) = dist(rng);
  }
  RowVector x(flat);
  for (int i = 0; i < flat; ++i) x(i) = img.pixels[static_cast<std::size_t>(i)] / 255.0;
  const RowVector ref = (x * proj).normalized();
  EXPECT_LT((enc.EmbedImage(img) - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(enc.EmbedImage(Resize(img, 64, 64)).norm(), 1.0, 1e-12);
}

TEST(MockEncoder, VisualTokenShapes) {
  vl::MockVisionLanguageEncoder enc;
  const auto tok = enc.EncodeVisualTokens(Image(40, 40, 128));
  EXPECT_EQ(tok.grid, 16);
  EXPECT_EQ(tok.patch_tokens.rows(), 256);
  EXPECT_EQ(tok.patch_tokens.cols(), 1280);
  EXPECT_EQ(tok.cls_token.size(), 1024);
  EXPECT_THROW(vl::MakeVisionLanguageEncoder("clip-real", {}), Error);
}

TEST(SelectViewsForManifest, RewritesUrisInScoreOrder) {
  testing::TempDir dir("views");
  testing::FixtureOptions opts;
  const auto fx = testing::BuildPipeline(dir.path(), opts);
  for (const auto& s : fx.manifest.shapes) {
    ASSERT_EQ(s.view_uris.size(), 3u);
    ASSERT_EQ(s.view_scores.size(), 3u);
    EXPECT_TRUE(std::is_sorted(s.view_scores.rbegin(), s.view_scores.rend()));
  }
  // Recompute one shape by hand from its full candidate set.
  const vl::MockVisionLanguageEncoder enc(trainer::ProfileByName("desk").encoder);
  const auto& shape = fx.manifest.shapes.front();
  const auto images = dataset::RenderViews(shape, dataset::MakeRig(12, 20.0, 32));
  const auto sel = SelectTopK(EmbedViews(shape.shape_id, images, enc), MakeTextAnchor(shape.category, enc).vector, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(sel.scores[i], shape.view_scores[i], 1e-12);
    EXPECT_EQ(ReadPng(shape.view_uris[i]), images[static_cast<std::size_t>(sel.selected_indices[i])]);
  }
}

TEST(SelectViewsForManifest, MissingCategoryNeedsFallback) {
  testing::TempDir dir("views-fallback");
  auto fx = testing::BuildPipeline(dir.path());
  dataset::DatasetManifest m = fx.manifest;
  const vl::MockVisionLanguageEncoder enc(trainer::ProfileByName("desk").encoder);
  m.shapes.resize(1);
  m.shapes[0].category.clear();
  EXPECT_THROW(SelectViewsForManifest(m, enc, 2, Fallback::kNone), Error);
  SelectViewsForManifest(m, enc, 2, Fallback::kCentrality);
  EXPECT_EQ(m.shapes[0].view_uris.size(), 2u);
}

}  // namespace
}  // namespace sbsr::viewselect
