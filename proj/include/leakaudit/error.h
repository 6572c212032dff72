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

#ifndef LEAKAUDIT_ERROR_H_
#define LEAKAUDIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace leakaudit {

// Every failure the library reports. The CLI maps kinds onto exit codes via
// IsConfigError().
enum class ErrorKind {
  // audio-core
  kMalformedManifest,
  kInvalidLabel,
  kDuplicatePath,
  kEmptyClass,
  kUnsupportedFormat,
  kCorruptFile,
  kInvalidRate,
  kIoError,
  // enhance / segment / features
  kTooShort,
  kRateMismatch,
  kOutOfBounds,
  kMalformedAnnotation,
  kMissingAnnotation,
  kMissingSpeakerLabels,
  kEmptyRegions,
  kTooFewFrames,
  kFormatMismatch,
  kRegionFingerprintMismatch,
  kBandAboveNyquist,
  // classifier
  kDimMismatch,
  kDegenerateSplit,
  kNoChunks,
  // audit
  kTooFewSamples,
  kSingleClass,
  kInvalidPermutationCount,
  kEmpty,
  kInvalidConfig,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for errors caused by the caller's configuration rather than the data.
bool IsConfigError(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_ERROR_H_
