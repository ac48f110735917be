// src/errors.cc

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

#include "voicemix/errors.hpp"

namespace voicemix {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kMissingFile: return "MissingFile";
    case ErrorKind::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::kClipTooShort: return "ClipTooShort";
    case ErrorKind::kMagnitudeOnly: return "MagnitudeOnly";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kWrongDimension: return "WrongDimension";
    case ErrorKind::kTruncatedFile: return "TruncatedFile";
    case ErrorKind::kBackendLaunchFailure: return "BackendLaunchFailure";
    case ErrorKind::kBackendNonZeroExit: return "BackendNonZeroExit";
    case ErrorKind::kBadTimbreFromBackend: return "BadTimbreFromBackend";
    case ErrorKind::kInsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorKind::kWeightsNotSimplex: return "WeightsNotSimplex";
    case ErrorKind::kFeatureTooSmall: return "FeatureTooSmall";
    case ErrorKind::kEmptyReference: return "EmptyReference";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kInsufficientClasses: return "InsufficientClasses";
    case ErrorKind::kTooFewVectors: return "TooFewVectors";
    case ErrorKind::kUnwritablePath: return "UnwritablePath";
    case ErrorKind::kStoreCorrupt: return "StoreCorrupt";
    case ErrorKind::kFailureRateExceeded: return "FailureRateExceeded";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

}  // namespace voicemix
