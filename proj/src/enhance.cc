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

#include "leakaudit/enhance.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "leakaudit/dsp.h"
#include "leakaudit/error.h"

namespace leakaudit {
namespace {

constexpr double kLimiterKnee = 0.9;
constexpr size_t kMinNoiseFrames = 10;

void CheckWindowing(const AudioSample& sample, double window_s, double hop_s) {
  if (sample.rate < 8000) {
    throw Error(ErrorKind::kInvalidRate,
                "loudness needs rate >= 8000 Hz, got " +
                    std::to_string(sample.rate));
  }
  if (!(window_s > hop_s && hop_s > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "need window_s > hop_s > 0");
  }
  const auto window = static_cast<size_t>(std::llround(window_s * sample.rate));
  if (sample.samples.size() < window) {
    throw Error(ErrorKind::kTooShort, "signal shorter than one loudness window");
  }
}

double SoftLimit(double y) {
  const double a = std::abs(y);
  if (a <= kLimiterKnee) return y;
  const double span = 1.0 - kLimiterKnee;
  return std::copysign(kLimiterKnee + span * std::tanh((a - kLimiterKnee) / span),
                       y);
}

}  // namespace

std::vector<double> KWeight(std::span<const double> samples, int rate) {
  std::vector<double> out(samples.begin(), samples.end());
  {
    const double f0 = 1681.974450955533;
    const double gain_db = 3.999843853973347;
    const double q = 0.7071752369554196;
    const double k = std::tan(std::numbers::pi * f0 / rate);
    const double vh = std::pow(10.0, gain_db / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + k / q + k * k;
    dsp::Biquad shelf{(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0,
                      (vh - vb * k / q + k * k) / a0,
                      2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0};
    shelf.Apply(out);
  }
  {
    const double f0 = 38.13547087602444;
    const double q = 0.5003270373238773;
    const double k = std::tan(std::numbers::pi * f0 / rate);
    const double a0 = 1.0 + k / q + k * k;
    dsp::Biquad high_pass{1.0, -2.0, 1.0, 2.0 * (k * k - 1.0) / a0,
                          (1.0 - k / q + k * k) / a0};
    high_pass.Apply(out);
  }
  return out;
}

LoudnessProfile MeasureLoudness(const AudioSample& sample, double window_s,
                                double hop_s) {
  CheckWindowing(sample, window_s, hop_s);
  const auto window = static_cast<size_t>(std::llround(window_s * sample.rate));
  const auto hop = static_cast<size_t>(std::llround(hop_s * sample.rate));
  const std::vector<double> weighted = KWeight(sample.samples, sample.rate);

  std::vector<double> prefix(weighted.size() + 1, 0.0);
  for (size_t i = 0; i < weighted.size(); ++i) {
    prefix[i + 1] = prefix[i] + weighted[i] * weighted[i];
  }
  LoudnessProfile profile;
  profile.window_s = window_s;
  profile.hop_s = hop_s;
  const size_t count = (weighted.size() - window) / hop + 1;
  profile.window_loudness.reserve(count);
  for (size_t w = 0; w < count; ++w) {
    const double mean_square =
        (prefix[w * hop + window] - prefix[w * hop]) / window;
    const double lufs = -0.691 + 10.0 * std::log10(mean_square + 1e-30);
    if (lufs < kAbsoluteGateLufs) {
      profile.window_loudness.push_back(std::nullopt);
    } else {
      profile.window_loudness.push_back(lufs);
    }
  }
  return profile;
}

AudioSample LoudnessNormalize(const AudioSample& sample,
                              const LoudnessOptions& options) {
  const LoudnessProfile profile =
      MeasureLoudness(sample, options.window_s, options.hop_s);
  const auto window =
      static_cast<double>(std::llround(options.window_s * sample.rate));
  const auto hop =
      static_cast<double>(std::llround(options.hop_s * sample.rate));

  const size_t count = profile.window_loudness.size();
  std::vector<double> gain_db(count);
  double previous = 0.0;
  for (size_t w = 0; w < count; ++w) {
    if (profile.window_loudness[w]) {
      previous = std::clamp(options.target_lufs - *profile.window_loudness[w],
                            -options.max_gain_db, options.max_gain_db);
    }
    gain_db[w] = previous;
  }

  AudioSample out = sample;
  const double first_center = window / 2.0;
  for (size_t n = 0; n < out.samples.size(); ++n) {
    const double pos = (static_cast<double>(n) - first_center) / hop;
    double g;
    if (pos <= 0.0) {
      g = gain_db.front();
    } else if (pos >= static_cast<double>(count - 1)) {
      g = gain_db.back();
    } else {
      const auto w = static_cast<size_t>(pos);
      const double frac = pos - w;
      g = gain_db[w] + frac * (gain_db[w + 1] - gain_db[w]);
    }
    out.samples[n] = SoftLimit(out.samples[n] * std::pow(10.0, g / 20.0));
  }
  return out;
}

size_t DefaultStftSize(int rate) {
  return dsp::NextPowerOfTwo(static_cast<size_t>(std::llround(0.032 * rate)));
}

NoiseProfile EstimateNoiseProfile(const AudioSample& sample,
                                  const RegionSet* regions, size_t fft_size) {
  if (fft_size < 4 || fft_size % 2 != 0) {
    throw Error(ErrorKind::kInvalidConfig, "fft_size must be even and >= 4");
  }
  const size_t hop = fft_size / 2;
  const size_t n = sample.samples.size();
  const size_t frames = n >= fft_size ? (n - fft_size) / hop + 1 : 0;

  std::vector<size_t> selected;
  if (regions != nullptr) {
    for (size_t f = 0; f < frames; ++f) {
      const double start = static_cast<double>(f * hop) / sample.rate;
      const double end = static_cast<double>(f * hop + fft_size) / sample.rate;
      for (const Interval& iv : regions->intervals()) {
        if (iv.start_s <= start && end <= iv.end_s) {
          selected.push_back(f);
          break;
        }
      }
    }
  } else {
    selected.resize(frames);
    std::iota(selected.begin(), selected.end(), size_t{0});
    std::vector<double> energy(frames);
    for (size_t f = 0; f < frames; ++f) {
      energy[f] = dsp::MeanSquare(
          std::span(sample.samples).subspan(f * hop, fft_size));
    }
    std::stable_sort(selected.begin(), selected.end(),
                     [&](size_t a, size_t b) { return energy[a] < energy[b]; });
    selected.resize(std::min(frames, std::max(kMinNoiseFrames, frames / 10)));
  }
  if (selected.size() < kMinNoiseFrames) {
    throw Error(ErrorKind::kTooShort,
                "noise profile needs at least 10 frames, have " +
                    std::to_string(selected.size()));
  }

  dsp::RealFft fft(fft_size);
  const std::vector<double> window = dsp::HannWindow(fft_size);
  NoiseProfile profile;
  profile.fft_size = fft_size;
  profile.rate = sample.rate;
  profile.magnitude.assign(fft.num_bins(), 0.0);
  std::vector<double> frame(fft_size);
  std::vector<dsp::Complex> bins;
  for (size_t f : selected) {
    for (size_t i = 0; i < fft_size; ++i) {
      frame[i] = sample.samples[f * hop + i] * window[i];
    }
    fft.Forward(frame, bins);
    for (size_t b = 0; b < bins.size(); ++b) {
      profile.magnitude[b] += std::abs(bins[b]);
    }
  }
  for (double& m : profile.magnitude) m /= static_cast<double>(selected.size());
  return profile;
}

double SubtractionGain(double magnitude, double noise, double oversubtraction,
                       double floor) {
  if (!(magnitude > 0.0)) return 1.0;
  return std::max(magnitude - oversubtraction * noise, floor * magnitude) /
         magnitude;
}

AudioSample SpectralSubtract(const AudioSample& sample,
                             const NoiseProfile& profile,
                             double oversubtraction, double floor) {
  if (profile.rate != sample.rate) {
    throw Error(ErrorKind::kRateMismatch,
                "profile rate " + std::to_string(profile.rate) +
                    " != sample rate " + std::to_string(sample.rate));
  }
  if (!(oversubtraction >= 1.0) || !(floor > 0.0 && floor < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                "need oversubtraction >= 1 and 0 < floor < 1");
  }
  const size_t size = profile.fft_size;
  if (profile.magnitude.size() != size / 2 + 1) {
    throw Error(ErrorKind::kInvalidConfig, "profile bin count mismatch");
  }
  const size_t hop = size / 2;
  const auto n = static_cast<int64_t>(sample.samples.size());
  const std::vector<double> window = dsp::HannWindow(size);

  std::vector<double> acc(sample.samples.size(), 0.0);
  std::vector<double> norm(sample.samples.size(), 0.0);
  dsp::RealFft fft(size);
  std::vector<double> frame(size), synth;
  std::vector<dsp::Complex> bins;
  // Frames start one hop before the signal so every sample is covered twice.
  for (int64_t start = -static_cast<int64_t>(hop); start < n;
       start += static_cast<int64_t>(hop)) {
    for (size_t i = 0; i < size; ++i) {
      const int64_t k = start + static_cast<int64_t>(i);
      frame[i] = (k >= 0 && k < n) ? sample.samples[k] * window[i] : 0.0;
    }
    fft.Forward(frame, bins);
    for (size_t b = 0; b < bins.size(); ++b) {
      bins[b] *= SubtractionGain(std::abs(bins[b]), profile.magnitude[b],
                                 oversubtraction, floor);
    }
    fft.Inverse(bins, synth);
    for (size_t i = 0; i < size; ++i) {
      const int64_t k = start + static_cast<int64_t>(i);
      if (k < 0 || k >= n) continue;
      acc[k] += synth[i] * window[i];
      norm[k] += window[i] * window[i];
    }
  }
  AudioSample out = sample;
  for (size_t i = 0; i < acc.size(); ++i) {
    out.samples[i] =
        norm[i] > 1e-12 ? std::clamp(acc[i] / norm[i], -1.0, 1.0) : 0.0;
  }
  return out;
}

std::string_view EnhancementName(Enhancement e) {
  switch (e) {
    case Enhancement::kOrig: return "orig";
    case Enhancement::kNr: return "nr";
    case Enhancement::kLnNr: return "ln_nr";
    case Enhancement::kLn: return "ln";
  }
  return "";
}

Enhancement ParseEnhancement(std::string_view name) {
  if (name == "orig") return Enhancement::kOrig;
  if (name == "nr") return Enhancement::kNr;
  if (name == "ln_nr") return Enhancement::kLnNr;
  if (name == "ln") return Enhancement::kLn;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown enhancement '" + std::string(name) + "'");
}

AudioSample Enhance(const AudioSample& sample, Enhancement mode) {
  auto denoise = [](const AudioSample& in) {
    const NoiseProfile profile =
        EstimateNoiseProfile(in, nullptr, DefaultStftSize(in.rate));
    return SpectralSubtract(in, profile);
  };
  switch (mode) {
    case Enhancement::kOrig: return sample;
    case Enhancement::kNr: return denoise(sample);
    case Enhancement::kLn: return LoudnessNormalize(sample);
    case Enhancement::kLnNr: return denoise(LoudnessNormalize(sample));
  }
  return sample;
}

}  // namespace leakaudit
