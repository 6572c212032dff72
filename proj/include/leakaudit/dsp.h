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

#ifndef LEAKAUDIT_DSP_H_
#define LEAKAUDIT_DSP_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace leakaudit::dsp {

using Complex = std::complex<double>;

// Real-input FFT of a fixed size. Not thread-safe; create one per thread.
class RealFft {
 public:
  explicit RealFft(size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  size_t size() const { return size_; }
  size_t num_bins() const { return size_ / 2 + 1; }

  // `input` shorter than size() is zero-padded. Writes num_bins() values.
  void Forward(std::span<const double> input, std::vector<Complex>& bins);
  // Inverse of Forward, including the 1/N scale.
  void Inverse(std::span<const Complex> bins, std::vector<double>& output);

 private:
  struct Impl;
  size_t size_;
  std::unique_ptr<Impl> impl_;
  std::vector<double> scratch_;
};

size_t NextPowerOfTwo(size_t n);

// Periodic Hann window (the DFT-even variant used for spectral analysis).
std::vector<double> HannWindow(size_t length);

// Direct-form-I second-order section.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

  // Filters `samples` in place starting from zero state.
  void Apply(std::span<double> samples) const;
};

// RBJ cookbook band-pass (constant 0 dB peak gain).
Biquad BandPass(double center_hz, double q, double rate);
// RBJ cookbook low-pass.
Biquad LowPass(double cutoff_hz, double q, double rate);

// Averaged Hann-windowed periodogram with `segment` samples per frame and
// 50% overlap. Returns segment/2 + 1 power values; a signal shorter than one
// segment is analysed as a single zero-padded frame.
std::vector<double> WelchPeriodogram(std::span<const double> signal,
                                     size_t segment);

double MeanSquare(std::span<const double> samples);

// 10 * log10(power) with a floor of -300 dB for zero power.
double PowerDb(double power);

}  // namespace leakaudit::dsp

#endif  // LEAKAUDIT_DSP_H_
