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

#include "sbsr/diffusion/mock_backbone.hpp"

#include <fmt/core.h>

#include <cctype>
#include <cmath>

#include "sbsr/core/error.hpp"
#include "sbsr/core/hash.hpp"
#include "sbsr/core/resample.hpp"

namespace sbsr::diffusion {

using ag::Var;

MockBackbone::MockBackbone(BackboneDims dims) : dims_(dims), schedule_(NoiseSchedule::ScaledLinear()) {
  dims_.Validate();
  const Index d = dims_.latent_channels;
  const auto [c1, c2, c3] = dims_.block_channels;
  const Index e = dims_.time_embed_dim;
  const Index a = dims_.attention_width;
  const Index ctx = dims_.context_width();

  latent_lift_ = GaussianMatrix(3, d, HashCombine(kWeightSeed, Fnv1a64("latent_lift")));
  w_in_ = Weight("in", d, c1);
  w_12_ = Weight("down2", c1, c2);
  w_23_ = Weight("down3", c2, c3);
  w_mid_ = Weight("up1", c3, c3);
  w_up2_ = Weight("up2", c3, c2);
  w_skip2_ = Weight("skip2", c2, c2);
  w_up3_ = Weight("up3", c2, c1);
  w_skip3_ = Weight("skip3", c1, c1);
  w_out_ = Weight("out", c1, d);
  w_time_ = Weight("time", e, e);
  w_pooled_ = Weight("pooled", dims_.pooled_width(), e);
  for (int k = 0; k < kHookCount; ++k) {
    const Index ck = dims_.hook_channels(k);
    time_bias_[static_cast<std::size_t>(k)] = Weight(fmt::format("time_bias{}", k), e, ck);
    auto& s = sites_[static_cast<std::size_t>(k)];
    s.wq = Weight(fmt::format("attn{}.q", k), ck, a);
    s.wk = Weight(fmt::format("attn{}.k", k), ctx, a);
    s.wv = Weight(fmt::format("attn{}.v", k), ctx, a);
    s.wo = Weight(fmt::format("attn{}.o", k), a, ck);
  }
}

// Fan-in scaled so activations stay O(1) through the stack.
Var MockBackbone::Weight(const std::string& name, Index rows, Index cols) {
  Var w = Var::Constant(
      GaussianMatrix(rows, cols, HashCombine(kWeightSeed, Fnv1a64(name)), 1.0 / std::sqrt(static_cast<double>(rows))));
  weights_.push_back(w);
  return w;
}

LatentMap MockBackbone::EncodeLatent(const Image& image) const {
  if (image.empty() || image.width % kLatentStride != 0 || image.height % kLatentStride != 0) {
    throw Error(ErrorCode::kBadImageSize,
                fmt::format("image {}x{} is not divisible by {}", image.width, image.height, kLatentStride));
  }
  const Matrix centered = (ToUnitMatrix(image).array() * 2.0 - 1.0).matrix();
  const auto pool = AveragePoolOperator(image.height, image.width, kLatentStride);
  LatentMap z;
  z.height = image.height / kLatentStride;
  z.width = image.width / kLatentStride;
  z.values = (*pool * centered) * latent_lift_;
  return z;
}

std::vector<std::string> MockBackbone::Tokenize(std::string_view text) const {
  std::vector<std::string> tokens{kStartToken};
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc)) {
      word.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  const auto limit = static_cast<std::size_t>(dims_.text_tokens);
  if (tokens.size() + 1 > limit) tokens.resize(limit - 1);
  tokens.emplace_back(kEndToken);
  return tokens;
}

Matrix MockBackbone::EncodeText(std::string_view text) const {
  Matrix out(dims_.text_tokens, dims_.text_width_l);
  const auto tokens = Tokenize(text);
  RowVector running = RowVector::Zero(dims_.text_width_l);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    running += GaussianMatrix(1, dims_.text_width_l, Fnv1a64(tokens[i]));
    out.row(static_cast<Index>(i)) = running / std::sqrt(static_cast<double>(i + 1));
  }
  for (Index i = static_cast<Index>(tokens.size()); i < out.rows(); ++i) out.row(i) = out.row(i - 1);
  return out;
}

Var MockBackbone::TimeEmbedding(int t, const conditioning::ConditioningBundle& cond) const {
  const int half = dims_.time_embed_dim / 2;
  Matrix sinusoid(1, dims_.time_embed_dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    sinusoid(0, i) = std::cos(t * freq);
    sinusoid(0, half + i) = std::sin(t * freq);
  }
  Var emb = ag::MatMul(Var::Constant(std::move(sinusoid)), w_time_);
  if (cond.pooled.defined()) {
    if (cond.pooled.rows() != 1 || cond.pooled.cols() != dims_.pooled_width()) {
      throw Error(ErrorCode::kShapeMismatch, "pooled conditioning width");
    }
    emb = ag::Add(emb, ag::MatMul(cond.pooled, w_pooled_));
  }
  return ag::Silu(emb);
}

Var MockBackbone::Attend(int site, const Var& x, const conditioning::ConditioningBundle& cond) const {
  const auto& w = sites_[static_cast<std::size_t>(site)];
  const double inv = 1.0 / std::sqrt(static_cast<double>(dims_.attention_width));
  const Var q = ag::MatMul(x, w.wq);
  Var out = ag::MatMul(ag::SoftmaxRows(ag::Scale(ag::MatMulNT(q, ag::MatMul(cond.context, w.wk)), inv)),
                       ag::MatMul(cond.context, w.wv));
  if (cond.image_tokens.defined() && static_cast<std::size_t>(site) < cond.image_kv.size()) {
    const auto& kv = cond.image_kv[static_cast<std::size_t>(site)];
    const Var attn = ag::SoftmaxRows(ag::Scale(ag::MatMulNT(q, ag::MatMul(cond.image_tokens, kv.key)), inv));
    out = ag::Add(out, ag::Scale(ag::MatMul(attn, ag::MatMul(cond.image_tokens, kv.value)), cond.ip_scale));
  }
  return ag::MatMul(out, w.wo);
}

Var MockBackbone::Denoise(const LatentMap& z_t, int t, const conditioning::ConditioningBundle& cond,
                          const BlockHook& hook) const {
  schedule_.alpha_bar(t);  // validates t
  if (z_t.values.rows() != static_cast<Index>(z_t.height) * z_t.width || z_t.values.cols() != dims_.latent_channels) {
    throw Error(ErrorCode::kShapeMismatch, "latent shape");
  }
  if (z_t.height % 4 != 0 || z_t.width % 4 != 0) {
    throw Error(ErrorCode::kBadImageSize, "latent sides must divide by 4 (input by 32)");
  }
  if (!cond.context.defined() || cond.context.rows() != dims_.text_tokens ||
      cond.context.cols() != dims_.context_width()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("context must be {}x{}", dims_.text_tokens, dims_.context_width()));
  }
  if (cond.image_tokens.defined() && cond.image_tokens.cols() != dims_.context_width()) {
    throw Error(ErrorCode::kShapeMismatch, "image token width");
  }

  const Var temb = TimeEmbedding(t, cond);
  auto block = [&](int k, const Var& pre, int h, int w) {
    Var x = ag::Silu(ag::AddRowBroadcast(pre, ag::MatMul(temb, time_bias_[static_cast<std::size_t>(k)])));
    x = ag::Add(x, Attend(k, x, cond));
    return hook(k, SpatialMap{h, w, x});
  };

  const int h1 = z_t.height, w1 = z_t.width;
  const int h2 = h1 / 2, w2 = w1 / 2;
  const int h3 = h2 / 2, w3 = w2 / 2;
  const auto pool1 = AveragePoolOperator(h1, w1, 2);
  const auto pool2 = AveragePoolOperator(h2, w2, 2);

  const Var f1 = block(0, ag::MatMul(Var::Constant(z_t.values), w_in_), h1, w1);
  const Var f2 = block(1, ag::MatMul(ag::LeftApply(pool1, f1), w_12_), h2, w2);
  const Var f3 = block(2, ag::MatMul(ag::LeftApply(pool2, f2), w_23_), h3, w3);
  const Var g1 = block(3, ag::MatMul(f3, w_mid_), h3, w3);
  const Var g2 = block(
      4, ag::Add(ag::MatMul(ag::LeftApply(NearestUpsample2xOperator(h3, w3), g1), w_up2_), ag::MatMul(f2, w_skip2_)),
      h2, w2);
  const Var g3 = block(
      5, ag::Add(ag::MatMul(ag::LeftApply(NearestUpsample2xOperator(h2, w2), g2), w_up3_), ag::MatMul(f1, w_skip3_)),
      h1, w1);
  return ag::MatMul(g3, w_out_);
}

std::uint64_t MockBackbone::WeightChecksum() const {
  std::uint64_t h = MatrixChecksum(latent_lift_);
  for (const auto& w : weights_) h = HashCombine(h, MatrixChecksum(w.value()));
  return h;
}

}  // namespace sbsr::diffusion
