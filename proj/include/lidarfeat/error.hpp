//==============================================================================
// Copyright 2026 The lidarfeat Authors
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
//==============================================================================

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lidarfeat {

enum class ErrorCode {
  FileNotFound,
  MalformedFile,
  NonFiniteValue,
  LengthMismatch,
  EmptySequence,
  DegenerateOrigin,
  InsufficientPoints,
  TooFewPoints,
  DimensionMismatch,
  MissingImage,
  EmptyInput,
  NonPositiveDepth,
  AllClassesAbsent,
  NoCandidates,
  ZeroVector,
  DegenerateClasses,
  InvalidArgument,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above. The
/// message names the offending file and byte offset when one is known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::DegenerateOrigin: return "DegenerateOrigin";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::AllClassesAbsent: return "AllClassesAbsent";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DegenerateClasses: return "DegenerateClasses";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace lidarfeat
