/* Copyright 2026 The boxseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace boxseg {

enum class ErrorCode {
  kDegenerateBox,
  kDegenerateOrientation,
  kAngleMismatch,
  kEmptyMask,
  kEmptyImage,
  kEmptyAnnotation,
  kUnreadableFile,
  kDimensionMismatch,
  kNoComponents,
  kDegenerateBoundary,
  kInfeasible,
  kSelfIntersecting,
  kMissingMask,
  kPlacementFailed,
  kEmptyList,
  kParseError,
  kValidation,
  kIo,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kDegenerateOrientation: return "DegenerateOrientation";
    case ErrorCode::kAngleMismatch: return "AngleMismatch";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kEmptyAnnotation: return "EmptyAnnotation";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoComponents: return "NoComponents";
    case ErrorCode::kDegenerateBoundary: return "DegenerateBoundary";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kSelfIntersecting: return "SelfIntersecting";
    case ErrorCode::kMissingMask: return "MissingMask";
    case ErrorCode::kPlacementFailed: return "PlacementFailed";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidation: return "Validation";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// All library failures are reported through this exception; callers that
// need to isolate failures (per box, per image) catch it and inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace boxseg
