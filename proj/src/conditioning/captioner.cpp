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

#include "sbsr/conditioning/captioner.hpp"

#include <fmt/core.h>

#include "sbsr/core/error.hpp"

namespace sbsr::conditioning {

std::string_view CaptionPrefix(Modality modality) {
  return modality == Modality::kSketch ? "a sketch of" : "a 3D rendering of";
}

std::string StubCaptioner::Caption(const Image& image, Modality modality, std::string_view category_hint) const {
  if (category_hint.empty()) return std::string(CaptionPrefix(modality));
  return fmt::format("{} {}", CaptionPrefix(modality), category_hint);
}

std::unique_ptr<Captioner> MakeCaptioner(std::string_view id) {
  if (id == "stub") return std::make_unique<StubCaptioner>();
  throw Error(ErrorCode::kCaptionerUnavailable, fmt::format("captioner '{}' is not available in this build", id));
}

}  // namespace sbsr::conditioning
