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

#include "sbsr/core/error.hpp"

#include <fmt/core.h>

namespace sbsr {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kMissingDirectory:
      return "MissingDirectory";
    case ErrorCode::kDuplicateId:
      return "DuplicateId";
    case ErrorCode::kEmptyCategory:
      return "EmptyCategory";
    case ErrorCode::kCountMismatch:
      return "CountMismatch";
    case ErrorCode::kMeshLoadFailure:
      return "MeshLoadFailure";
    case ErrorCode::kDegenerateMesh:
      return "DegenerateMesh";
    case ErrorCode::kEncoderUnavailable:
      return "EncoderUnavailable";
    case ErrorCode::kBackboneUnavailable:
      return "BackboneUnavailable";
    case ErrorCode::kCaptionerUnavailable:
      return "CaptionerUnavailable";
    case ErrorCode::kBadImageSize:
      return "BadImageSize";
    case ErrorCode::kInvalidTimestep:
      return "InvalidTimestep";
    case ErrorCode::kHookMismatch:
      return "HookMismatch";
    case ErrorCode::kNonFiniteFeatures:
      return "NonFiniteFeatures";
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kEmptyViewSet:
      return "EmptyViewSet";
    case ErrorCode::kNonFiniteSimilarity:
      return "NonFiniteSimilarity";
    case ErrorCode::kUnknownLabel:
      return "UnknownLabel";
    case ErrorCode::kInsufficientData:
      return "InsufficientData";
    case ErrorCode::kNonFiniteLoss:
      return "NonFiniteLoss";
    case ErrorCode::kCheckpointCorrupt:
      return "CheckpointCorrupt";
    case ErrorCode::kEmptyIndex:
      return "EmptyIndex";
    case ErrorCode::kNoRelevantItems:
      return "NoRelevantItems";
    case ErrorCode::kIncompatibleAssets:
      return "IncompatibleAssets";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", ToString(code), message)), code_(code) {}

}  // namespace sbsr
