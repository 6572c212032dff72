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

#ifndef LEAKAUDIT_AUDIO_H_
#define LEAKAUDIT_AUDIO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leakaudit {

// Decoded mono recording. Amplitudes are finite and within [-1, 1].
struct AudioSample {
  std::vector<double> samples;
  int rate = 0;
  std::string source_path;
  // Rate of the file on disk; survives resampling.
  int original_rate = 0;
  bool channels_collapsed = false;

  double duration_s() const {
    return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0;
  }
};

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// Reads a RIFF/WAVE file holding 8/16/24/32-bit integer PCM or 32-bit float
// samples. Integer PCM maps to [-1, 1) by dividing by 2^(bits-1); channels
// are averaged.
AudioSample DecodeWav(const std::string& path);
AudioSample DecodeWavBytes(std::span<const uint8_t> bytes,
                           const std::string& source_path);

// Writes a mono WAV file. Integer encodings round to nearest and saturate.
void WriteWav(const std::string& path, std::span<const double> samples,
              int rate, WavEncoding encoding = WavEncoding::kPcm16);
std::vector<uint8_t> EncodeWav(std::span<const double> samples, int rate,
                               WavEncoding encoding = WavEncoding::kPcm16,
                               int channels = 1);

// Band-limited rational-ratio resampler (Kaiser-windowed sinc, polyphase).
// The output length is ceil(n * target / rate) and the anti-alias filter
// stops at the lower of the two Nyquist frequencies with >= 80 dB rejection.
AudioSample Resample(const AudioSample& sample, int target_rate);

// Resample to `intermediate_rate` then to `target_rate`, bounding the
// bandwidth of every recording to intermediate_rate / 2.
AudioSample Homogenize(const AudioSample& sample, int intermediate_rate,
                       int target_rate);

}  // namespace leakaudit

#endif  // LEAKAUDIT_AUDIO_H_
