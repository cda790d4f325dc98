// Copyright 2026 The Geodex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geodex/error.h"

namespace geodex {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyMesh: return "EmptyMesh";
    case ErrorCode::kDegenerateExtent: return "DegenerateExtent";
    case ErrorCode::kNonPositiveVolume: return "NonPositiveVolume";
    case ErrorCode::kBadSpec: return "BadSpec";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadLabel: return "BadLabel";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kFrozenModel: return "FrozenModel";
    case ErrorCode::kNotFrozen: return "NotFrozen";
    case ErrorCode::kUnknownObject: return "UnknownObject";
    case ErrorCode::kEpisodeOver: return "EpisodeOver";
    case ErrorCode::kNonFiniteAction: return "NonFiniteAction";
    case ErrorCode::kMalformedEpisode: return "MalformedEpisode";
    case ErrorCode::kEmptyBuffer: return "EmptyBuffer";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kTooFewObjects: return "TooFewObjects";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kBadSpec:
    case ErrorCode::kTooFewObjects:
    case ErrorCode::kModeMismatch:
    case ErrorCode::kUnknownObject:
      return true;
    default:
      return false;
  }
}

}  // namespace geodex
