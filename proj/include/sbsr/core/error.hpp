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

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbsr {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kParseError,
  kMissingDirectory,
  kDuplicateId,
  kEmptyCategory,
  kCountMismatch,
  kMeshLoadFailure,
  kDegenerateMesh,
  kEncoderUnavailable,
  kBackboneUnavailable,
  kCaptionerUnavailable,
  kBadImageSize,
  kInvalidTimestep,
  kHookMismatch,
  kNonFiniteFeatures,
  kShapeMismatch,
  kEmptyViewSet,
  kNonFiniteSimilarity,
  kUnknownLabel,
  kInsufficientData,
  kNonFiniteLoss,
  kCheckpointCorrupt,
  kEmptyIndex,
  kNoRelevantItems,
  kIncompatibleAssets,
};

std::string_view ToString(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so that
// callers (CLI, service, tests) can branch on the kind without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbsr
