// include/voicemix/errors.hpp

// Copyright 2026  The voicemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voicemix {

enum class ErrorKind {
  kInvalidArgument,
  kMissingFile,
  kUnsupportedEncoding,
  kClipTooShort,
  kMagnitudeOnly,
  kDimensionMismatch,
  kBadMagic,
  kWrongDimension,
  kTruncatedFile,
  kBackendLaunchFailure,
  kBackendNonZeroExit,
  kBadTimbreFromBackend,
  kInsufficientSpeakers,
  kWeightsNotSimplex,
  kFeatureTooSmall,
  kEmptyReference,
  kEmptyCorpus,
  kInsufficientClasses,
  kTooFewVectors,
  kUnwritablePath,
  kStoreCorrupt,
  kFailureRateExceeded,
  kSchemaViolation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace voicemix
