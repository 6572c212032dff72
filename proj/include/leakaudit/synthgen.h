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

#ifndef LEAKAUDIT_SYNTHGEN_H_
#define LEAKAUDIT_SYNTHGEN_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/manifest.h"
#include "leakaudit/segment.h"

namespace leakaudit {

enum class ConfoundKind { kNone, kNoiseFloor, kBandwidth, kLoudness };

// A class-correlated recording condition. `value[label]` is the parameter a
// recording of that class receives when the confound is set by class:
//   noise_floor  device floor offset in dB (0 vs delta)
//   bandwidth    audio bandwidth in Hz
//   loudness     overall gain in dB (0 vs delta)
struct Confound {
  ConfoundKind kind = ConfoundKind::kNone;
  std::array<double, 2> value = {0.0, 0.0};

  static Confound None() { return {}; }
  static Confound NoiseFloor(double delta_db) {
    return {ConfoundKind::kNoiseFloor, {0.0, delta_db}};
  }
  static Confound Bandwidth(double control_hz, double ad_hz) {
    return {ConfoundKind::kBandwidth, {control_hz, ad_hz}};
  }
  static Confound Loudness(double delta_lu) {
    return {ConfoundKind::kLoudness, {0.0, delta_lu}};
  }
};

// "none", "noise_floor:<dB>", "bandwidth:<hz0>:<hz1>", "loudness:<LU>".
// Throws Error(kInvalidConfig).
Confound ParseConfound(std::string_view text);
std::string FormatConfound(const Confound& confound);

struct SynthSpec {
  int n_per_class = 20;
  double duration_s = 60.0;
  double speech_duty = 0.75;
  Confound confound;
  double confound_strength = 1.0;
  uint64_t seed = 0;
  int rate = 16000;
  // Syllable rate of the speech surrogate per class. Equal rates keep the
  // speech content class-independent.
  std::array<double, 2> syllable_rate_hz = {4.5, 4.5};

  // Throws Error(kInvalidConfig).
  void Validate() const;
};

// Nominal levels, dBFS RMS, before per-recording jitter.
inline constexpr double kSynthSpeechDb = -18.0;
inline constexpr double kSynthBedDb = -45.0;
inline constexpr double kSynthFloorDb = -37.2;

struct SynthRecording {
  std::vector<double> samples;
  // Units cover exactly the samples where the gating envelope is non-zero.
  Annotation annotation;
  // Speech gate per sample, in [0, 1].
  std::vector<double> gate;
};

// One recording of class `label` with confound parameter `confound_value`.
SynthRecording SynthesizeRecording(const SynthSpec& spec, int label,
                                   double confound_value, uint64_t seed);

struct ConfoundAssignment {
  double value = 0.0;
  bool class_set = false;
};

// Per-class assignment: a seeded subset of round(strength * n) recordings
// takes the class value, the rest draw either value with equal odds.
std::vector<ConfoundAssignment> AssignConfound(const SynthSpec& spec,
                                               int label);

// Writes audio/rec_NNN.wav, annotations/rec_NNN.csv and manifest.csv under
// `out_dir`. Class 0 recordings come first. Throws Error(kIoError).
DatasetManifest SynthDataset(const SynthSpec& spec, const std::string& out_dir);

}  // namespace leakaudit

#endif  // LEAKAUDIT_SYNTHGEN_H_
