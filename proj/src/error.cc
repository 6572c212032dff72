// Copyright 2026 The Leakaudit Authors.
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

#include "leakaudit/error.h"

namespace leakaudit {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedManifest: return "MalformedManifest";
    case ErrorKind::kInvalidLabel: return "InvalidLabel";
    case ErrorKind::kDuplicatePath: return "DuplicatePath";
    case ErrorKind::kEmptyClass: return "EmptyClass";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kCorruptFile: return "CorruptFile";
    case ErrorKind::kInvalidRate: return "InvalidRate";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kRateMismatch: return "RateMismatch";
    case ErrorKind::kOutOfBounds: return "OutOfBounds";
    case ErrorKind::kMalformedAnnotation: return "MalformedAnnotation";
    case ErrorKind::kMissingAnnotation: return "MissingAnnotation";
    case ErrorKind::kMissingSpeakerLabels: return "MissingSpeakerLabels";
    case ErrorKind::kEmptyRegions: return "EmptyRegions";
    case ErrorKind::kTooFewFrames: return "TooFewFrames";
    case ErrorKind::kFormatMismatch: return "FormatMismatch";
    case ErrorKind::kRegionFingerprintMismatch:
      return "RegionFingerprintMismatch";
    case ErrorKind::kBandAboveNyquist: return "BandAboveNyquist";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kDegenerateSplit: return "DegenerateSplit";
    case ErrorKind::kNoChunks: return "NoChunks";
    case ErrorKind::kTooFewSamples: return "TooFewSamples";
    case ErrorKind::kSingleClass: return "SingleClass";
    case ErrorKind::kInvalidPermutationCount:
      return "InvalidPermutationCount";
    case ErrorKind::kEmpty: return "Empty";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool IsConfigError(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidRate:
    case ErrorKind::kMissingSpeakerLabels:
    case ErrorKind::kInvalidPermutationCount:
    case ErrorKind::kInvalidConfig:
      return true;
    default:
      return false;
  }
}

}  // namespace leakaudit
