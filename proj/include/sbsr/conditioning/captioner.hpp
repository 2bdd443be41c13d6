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

#include <memory>
#include <string>
#include <string_view>

#include "sbsr/core/image.hpp"

namespace sbsr::conditioning {

enum class Modality { kSketch, kRender };

// "a sketch of" / "a 3D rendering of"
std::string_view CaptionPrefix(Modality modality);

// Prefix-conditioned greedy captioning; deterministic for a given image.
class Captioner {
 public:
  virtual ~Captioner() = default;
  // `category_hint` is manifest metadata; real captioners ignore it.
  virtual std::string Caption(const Image& image, Modality modality, std::string_view category_hint) const = 0;
};

// Completes the prefix with the hint verbatim (bare prefix when the hint is empty).
class StubCaptioner final : public Captioner {
 public:
  std::string Caption(const Image& image, Modality modality, std::string_view category_hint) const override;
};

// "stub" is the only captioner in this build; anything else is CaptionerUnavailable.
std::unique_ptr<Captioner> MakeCaptioner(std::string_view id);

}  // namespace sbsr::conditioning
