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

#ifndef LEAKAUDIT_ENHANCE_H_
#define LEAKAUDIT_ENHANCE_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "leakaudit/audio.h"
#include "leakaudit/segment.h"

namespace leakaudit {

// Sliding-window K-weighted loudness. Windows quieter than the absolute gate
// hold std::nullopt.
struct LoudnessProfile {
  std::vector<std::optional<double>> window_loudness;
  double window_s = 0.4;
  double hop_s = 0.1;
};

inline constexpr double kAbsoluteGateLufs = -70.0;

// K-weighting pre-filter (high shelf then high pass) re-derived for `rate`
// by bilinear transform.
std::vector<double> KWeight(std::span<const double> samples, int rate);

LoudnessProfile MeasureLoudness(const AudioSample& sample,
                                double window_s = 0.4, double hop_s = 0.1);

struct LoudnessOptions {
  double target_lufs = -23.0;
  double window_s = 0.4;
  double hop_s = 0.1;
  double max_gain_db = 30.0;
};

// Drives every non-gated window to the target. Gains (dB) are interpolated
// linearly between window centres; gated windows reuse the previous gain.
// Peaks above 0.9 are soft-limited so the output stays in [-1, 1].
AudioSample LoudnessNormalize(const AudioSample& sample,
                              const LoudnessOptions& options = {});

struct NoiseProfile {
  std::vector<double> magnitude;  // fft_size / 2 + 1 bins
  size_t fft_size = 0;
  int rate = 0;
};

// 32 ms at the working rate, rounded up to a power of two.
size_t DefaultStftSize(int rate);

// Mean STFT magnitude (Hann, 50% overlap) over the frames that lie inside
// `regions`, or over the quietest 10% of all frames (at least 10) when no
// regions are given. Throws TooShort with fewer than 10 usable frames.
NoiseProfile EstimateNoiseProfile(const AudioSample& sample,
                                  const RegionSet* regions, size_t fft_size);

// Spectral gain for one bin: max(|X| - over * noise, floor * |X|) / |X|.
double SubtractionGain(double magnitude, double noise, double oversubtraction,
                       double floor);

// Magnitude spectral subtraction with phase kept; Hann analysis and synthesis
// windows at 50% overlap with weighted overlap-add normalisation, so a zero
// profile reproduces the input.
AudioSample SpectralSubtract(const AudioSample& sample,
                             const NoiseProfile& profile,
                             double oversubtraction = 1.5,
                             double floor = 0.05);

enum class Enhancement { kOrig, kNr, kLnNr, kLn };

std::string_view EnhancementName(Enhancement e);
Enhancement ParseEnhancement(std::string_view name);

// orig: unchanged; nr: noise reduction; ln: loudness normalisation;
// ln_nr: loudness normalisation followed by noise reduction.
AudioSample Enhance(const AudioSample& sample, Enhancement mode);

}  // namespace leakaudit

#endif  // LEAKAUDIT_ENHANCE_H_
