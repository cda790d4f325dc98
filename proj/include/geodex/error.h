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

#ifndef GEODEX_ERROR_H_
#define GEODEX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace geodex {

enum class ErrorCode {
  kZeroNorm,
  kNotARotation,
  kDegenerate,
  kParseError,
  kEmptyMesh,
  kDegenerateExtent,
  kNonPositiveVolume,
  kBadSpec,
  kShapeMismatch,
  kBadLabel,
  kLengthMismatch,
  kFrozenModel,
  kNotFrozen,
  kUnknownObject,
  kEpisodeOver,
  kNonFiniteAction,
  kMalformedEpisode,
  kEmptyBuffer,
  kModeMismatch,
  kEmptyBatch,
  kTooFewObjects,
  kConfig,
  kIo,
  kFormat,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library surface as this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Validation failures are reported to the CLI as exit code 1, everything else
// as exit code 2.
bool IsValidationError(ErrorCode code);

}  // namespace geodex

#endif  // GEODEX_ERROR_H_
