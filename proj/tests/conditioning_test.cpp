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

#include "sbsr/conditioning/captioner.hpp"
#include "sbsr/conditioning/conditioner.hpp"
#include "sbsr/conditioning/prompts.hpp"
#include "sbsr/core/error.hpp"
#include "sbsr/core/resample.hpp"
#include "sbsr/diffusion/features.hpp"
#include "sbsr/diffusion/mock_backbone.hpp"
#include "sbsr/trainer/config.hpp"

namespace sbsr::conditioning {
namespace {

struct DeskAssets {
  trainer::DeviceProfile profile = trainer::ProfileByName("desk");
  diffusion::MockBackbone backbone{profile.backbone};
  vl::MockVisionLanguageEncoder encoder{profile.encoder};
};

Image Stripes(int size) {
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if ((x + 2 * y) % 9 < 3) img.Set(x, y, 0, 0, 0);
    }
  }
  return img;
}

diffusion::MultiScaleFeatures RunFeatures(const DeskAssets& a, const ConditioningConfig& cfg, const ConditioningParams& params,
                                  const Image& img) {
  Conditioner c(cfg, a.backbone, a.encoder);
  const auto item = c.Prepare(img, "a sketch of chair");
  const auto z = a.backbone.EncodeLatent(img);
  return diffusion::ExtractFeaturesFromLatent(z, c.Assemble(item, params, z.height, z.width), 50, 11, a.backbone);
}

bool SameFeatures(const diffusion::MultiScaleFeatures& a, const diffusion::MultiScaleFeatures& b) {
  for (int k = 0; k < diffusion::kHookCount; ++k) {
    if (a.maps[k].data.value() != b.maps[k].data.value()) return false;
  }
  return true;
}

TEST(Prompts, ContextLayout) {
  const Matrix hard = GaussianMatrix(4, 3, 1);
  const ag::Var soft = ag::Var::Parameter(GaussianMatrix(5, 2, 2));
  const auto [ctx, pooled] = BuildContext(hard, soft);
  ASSERT_EQ(ctx.rows(), 4);
  ASSERT_EQ(ctx.cols(), 5);
  for (Index i = 0; i < 4; ++i) {
    EXPECT_EQ(ctx.value().row(i).head(3), hard.row(i));
    EXPECT_EQ(ctx.value().row(i).tail(2), soft.value().row(i + 1));
  }
  EXPECT_EQ(pooled.value(), soft.value().topRows(1));
  EXPECT_THROW(BuildContext(hard, ag::Var::Parameter(GaussianMatrix(4, 2, 2))), Error);
  ag::Backward(ag::Add(ag::Sum(ctx), ag::Scale(ag::Sum(pooled), 3.0)));
  Matrix expected = Matrix::Ones(5, 2);
  expected.row(0).setConstant(3.0);
  EXPECT_EQ(soft.grad(), expected);
}

TEST(Prompts, HardPromptAndSoftShape) {
  DeskAssets a;
  EXPECT_THROW(EncodeHardPrompt("", a.backbone), Error);
  EXPECT_EQ(EncodeHardPrompt("a sketch of cup", a.backbone).embedding, a.backbone.EncodeText("a sketch of cup"));
  const auto soft = MakeSoftPrompt(a.profile.backbone, 0.02, 1);
  EXPECT_EQ(soft.rows(), 78);
  EXPECT_EQ(soft.cols(), a.profile.backbone.pooled_width());
  EXPECT_TRUE(soft.requires_grad());
}

TEST(Captioner, StubUsesPrefixAndHint) {
  StubCaptioner c;
  EXPECT_EQ(c.Caption(Image(4, 4), Modality::kSketch, "chair"), "a sketch of chair");
  EXPECT_EQ(c.Caption(Image(4, 4), Modality::kRender, "chair"), "a 3D rendering of chair");
  EXPECT_EQ(c.Caption(Image(4, 4), Modality::kSketch, ""), "a sketch of");
  EXPECT_THROW(MakeCaptioner("blip2"), Error);
}

TEST(Injection, GlobalTokensAreProjectionChunks) {
  RowVector cls(2);
  cls << 1.0, -2.0;
  const ag::Var proj = ag::Var::Parameter(GaussianMatrix(2, 6, 3));
  const ag::Var tokens = ProjectGlobal(cls, proj, 3);
  ASSERT_EQ(tokens.rows(), 3);
  ASSERT_EQ(tokens.cols(), 2);
  const RowVector flat = cls * proj.value();
  for (Index t = 0; t < 3; ++t) {
    for (Index c = 0; c < 2; ++c) EXPECT_DOUBLE_EQ(tokens.value()(t, c), flat(t * 2 + c));
  }
  EXPECT_THROW(ProjectGlobal(cls, proj, 4), Error);
}

TEST(Injection, LocalResidualIsResizedPatchProjection) {
  const Matrix patches = GaussianMatrix(4, 3, 4);  // 2x2 grid
  const ag::Var kernel = ag::Var::Parameter(GaussianMatrix(3, 5, 5));
  const Matrix same = LocalResidual(patches, 2, kernel, 2, 2).value();
  EXPECT_LT((same - patches * kernel.value()).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix up = LocalResidual(patches, 2, kernel, 4, 4).value();
  EXPECT_LT((up - *BilinearResizeOperator(2, 2, 4, 4) * (patches * kernel.value())).cwiseAbs().maxCoeff(), 1e-12);
  const diffusion::SpatialMap f{4, 4, ag::Var::Constant(Matrix::Ones(16, 5))};
  const auto injected = InjectLocal(f, patches, 2, kernel);
  EXPECT_LT((injected.data.value() - (up.array() + 1.0).matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(InjectLocal({4, 4, ag::Var::Constant(Matrix::Ones(16, 4))}, patches, 2, kernel), Error);
  EXPECT_THROW(LocalResidual(patches, 3, kernel, 4, 4), Error);
}

TEST(Injection, ZeroInitializedPathwaysAreExactNoOps) {
  DeskAssets a;
  const Image img = Stripes(64);
  ConditioningConfig on;
  ConditioningConfig off = on;
  off.use_global = false;
  off.use_local = false;
  Conditioner c(on, a.backbone, a.encoder);
  const auto params = c.InitParams(3);
  for (const auto& kv : params.injection.image_kv) {
    EXPECT_TRUE(kv.key.value().isZero(0));
    EXPECT_TRUE(kv.value.value().isZero(0));
  }
  EXPECT_TRUE(SameFeatures(RunFeatures(a, on, params, img), RunFeatures(a, off, params, img)));
}

TEST(Injection, EachToggleChangesFeaturesOnceTrained) {
  DeskAssets a;
  const Image img = Stripes(64);
  ConditioningConfig all;
  Conditioner c(all, a.backbone, a.encoder);
  auto params = c.InitParams(3);
  for (auto& kv : params.injection.image_kv) {
    kv.key.mutable_value() = GaussianMatrix(kv.key.rows(), kv.key.cols(), 21, 0.1);
    kv.value.mutable_value() = GaussianMatrix(kv.value.rows(), kv.value.cols(), 22, 0.1);
  }
  for (auto& k : params.injection.local_kernels) k.mutable_value() = GaussianMatrix(k.rows(), k.cols(), 23, 0.1);
  const auto base = RunFeatures(a, all, params, img);
  for (int which = 0; which < 4; ++which) {
    ConditioningConfig cfg = all;
    (which == 0 ? cfg.use_global : which == 1 ? cfg.use_local : which == 2 ? cfg.use_hard : cfg.use_soft) = false;
    EXPECT_FALSE(SameFeatures(base, RunFeatures(a, cfg, params, img))) << "toggle " << which;
  }
}

TEST(Injection, LocalMapsOnlyTouchDownBlocksDirectly) {
  DeskAssets a;
  ConditioningConfig cfg;
  cfg.use_global = false;
  Conditioner c(cfg, a.backbone, a.encoder);
  auto params = c.InitParams(1);
  const auto item = c.Prepare(Stripes(64), "a sketch of");
  const auto b = c.Assemble(item, params, 8, 8);
  EXPECT_EQ(b.local_maps[0].rows(), 64);
  EXPECT_EQ(b.local_maps[1].rows(), 16);
  EXPECT_EQ(b.local_maps[2].rows(), 4);
  EXPECT_EQ(b.local_maps[2].cols(), 128);
  EXPECT_FALSE(b.image_tokens.defined());
}

TEST(Conditioner, HardOffUsesEmptyEncoding) {
  DeskAssets a;
  ConditioningConfig cfg;
  cfg.use_hard = false;
  Conditioner c(cfg, a.backbone, a.encoder);
  EXPECT_EQ(c.Prepare(Stripes(32), "a sketch of boat").hard, a.backbone.EncodeText(""));
}

TEST(Conditioner, SoftPenaltyAndHash) {
  DeskAssets a;
  ConditioningConfig cfg;
  cfg.soft_l2 = 0.5;
  Conditioner c(cfg, a.backbone, a.encoder);
  auto params = c.InitParams(2);
  EXPECT_NEAR(c.SoftPromptPenalty(params).scalar(), 0.5 * params.soft_prompt.value().squaredNorm(), 1e-12);
  const auto h = ConditioningHash(cfg, params);
  params.soft_prompt.mutable_value()(0, 0) += 1.0;
  EXPECT_NE(ConditioningHash(cfg, params), h);
  cfg.use_soft = false;
  EXPECT_EQ(Conditioner(cfg, a.backbone, a.encoder).SoftPromptPenalty(params).scalar(), 0.0);
  EXPECT_EQ(params.Trainable().size(), 2u + 2u * 6u + 3u);
}

TEST(ConditioningConfig, JsonAndValidation) {
  ConditioningConfig c;
  c.t_tokens = 7;
  c.use_local = false;
  const ConditioningConfig back = nlohmann::json(c).get<ConditioningConfig>();
  EXPECT_EQ(back.t_tokens, 7);
  EXPECT_FALSE(back.use_local);
  EXPECT_TRUE(back.use_global);
  EXPECT_EQ(nlohmann::json::parse(R"({"ip_scale": 0.5})").get<ConditioningConfig>().t_tokens, 4);
  c.t_tokens = 0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace sbsr::conditioning
