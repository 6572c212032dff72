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

#ifndef LEAKAUDIT_FEATURES_H_
#define LEAKAUDIT_FEATURES_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "leakaudit/audio.h"
#include "leakaudit/interchange.h"
#include "leakaudit/segment.h"

namespace leakaudit {

enum class FeatureOrigin { kMfcc, kExternal };

std::string_view FeatureOriginName(FeatureOrigin origin);
FeatureOrigin ParseFeatureOrigin(std::string_view name);

// Time-major feature matrix: one row per frame.
struct FeatureSequence {
  Eigen::MatrixXd frames;
  double hop_s = 0.0;
  FeatureOrigin origin = FeatureOrigin::kMfcc;

  Eigen::Index n_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

// Computes frames for one contiguous span of audio. Implementations must be
// reentrant: ExtractOverRegions may call them from several threads.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double hop_s() const = 0;
  // Spans shorter than this produce no frames.
  virtual double window_s() const = 0;
  virtual FeatureOrigin origin() const = 0;
  virtual Eigen::MatrixXd Extract(std::span<const double> samples) const = 0;
};

struct MfccOptions {
  int rate = 16000;
  int n_coeffs = 20;
  double window_s = 0.020;
  double hop_s = 0.010;
  int n_mels = 40;
  double preemphasis = 0.97;
  // 0 selects the next power of two above the window length.
  size_t fft_size = 0;
};

// Pre-emphasis, periodic Hann window, power spectrum, HTK-mel triangular
// filterbank from 0 Hz to Nyquist, natural log (floored at 1e-10) and
// orthonormal DCT-II truncated to n_coeffs.
class MfccExtractor : public FeatureExtractor {
 public:
  explicit MfccExtractor(const MfccOptions& options = {});

  Eigen::Index dim() const override { return options_.n_coeffs; }
  double hop_s() const override { return options_.hop_s; }
  double window_s() const override { return options_.window_s; }
  FeatureOrigin origin() const override { return FeatureOrigin::kMfcc; }
  Eigen::MatrixXd Extract(std::span<const double> samples) const override;

  size_t window_samples() const { return window_length_; }
  size_t hop_samples() const { return hop_length_; }
  size_t fft_size() const { return fft_size_; }
  // n_mels x (fft_size / 2 + 1)
  const Eigen::MatrixXd& mel_filterbank() const { return mel_; }

 private:
  MfccOptions options_;
  size_t window_length_;
  size_t hop_length_;
  size_t fft_size_;
  std::vector<double> window_;
  Eigen::MatrixXd mel_;
  Eigen::MatrixXd dct_;  // n_coeffs x n_mels
};

// frames = floor((len - window) / hop) + 1. Throws TooShort.
FeatureSequence Mfcc(const AudioSample& sample, const MfccOptions& options = {});

// Per-dimension z-score with population statistics; constant dimensions map
// to zero. Throws TooFewFrames below two frames.
FeatureSequence ZNormalize(FeatureSequence features);

// Runs the extractor on each interval separately, concatenates the frame
// blocks in interval order, then z-normalizes. Intervals shorter than one
// extractor window are dropped and counted in `dropped` when non-null.
// Throws EmptyRegions when nothing usable remains.
FeatureSequence ExtractOverRegions(const AudioSample& sample,
                                   const RegionSet& regions,
                                   const FeatureExtractor& extractor,
                                   size_t* dropped = nullptr);

// Concatenates the region blocks of an embedding file in region order
// (un-normalized). Throws FormatMismatch, RegionFingerprintMismatch or
// EmptyRegions.
FeatureSequence EmbeddingsToFeatures(const EmbeddingFile& file,
                                     const RegionSet& regions);
FeatureSequence LoadEmbeddings(const std::string& path,
                               const RegionSet& regions);

// One block per region, values cast to float32.
EmbeddingFile FeaturesToEmbeddingFile(
    const std::vector<Eigen::MatrixXd>& blocks,
    const std::vector<uint32_t>& region_indices, double hop_s,
    uint64_t region_fingerprint);

struct ProbeBand {
  double low_hz = 14000.0;
  double high_hz = 16000.0;
};

// Parses "low:high" in Hz.
ProbeBand ParseProbeBand(std::string_view text);

// Welch-periodogram power inside the band as a fraction of total power, in
// dB. Must run on original-rate audio; throws BandAboveNyquist when
// 2 * high exceeds the sample rate. Digital silence reports -300 dB.
double NoiseFloorProbe(const AudioSample& sample, const ProbeBand& band = {});

struct ProbeResult {
  ProbeBand band;
  // Mean over measured recordings.
  double band_power_db = 0.0;
  std::map<std::string, double> per_recording;
  std::map<std::string, std::string> errors;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_FEATURES_H_
