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

#include "leakaudit/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace leakaudit::dsp {

struct RealFft::Impl {
  Eigen::FFT<double> fft;
  std::vector<Complex> full;
};

RealFft::RealFft(size_t size)
    : size_(size), impl_(std::make_unique<Impl>()), scratch_(size) {
  impl_->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::Forward(std::span<const double> input,
                      std::vector<Complex>& bins) {
  const size_t n = std::min(input.size(), size_);
  std::copy_n(input.begin(), n, scratch_.begin());
  std::fill(scratch_.begin() + n, scratch_.end(), 0.0);
  impl_->fft.fwd(bins, scratch_);
  bins.resize(num_bins());
}

void RealFft::Inverse(std::span<const Complex> bins,
                      std::vector<double>& output) {
  impl_->full.assign(bins.begin(), bins.end());
  impl_->fft.inv(output, impl_->full, size_);
}

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> HannWindow(size_t length) {
  std::vector<double> w(length);
  for (size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

void Biquad::Apply(std::span<double> samples) const {
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& s : samples) {
    const double x0 = s;
    const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
    s = y0;
  }
}

Biquad BandPass(double center_hz, double q, double rate) {
  const double w0 = 2.0 * std::numbers::pi * center_hz / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return Biquad{alpha / a0, 0.0, -alpha / a0, -2.0 * std::cos(w0) / a0,
                (1.0 - alpha) / a0};
}

Biquad LowPass(double cutoff_hz, double q, double rate) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return Biquad{(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
                -2.0 * c / a0, (1.0 - alpha) / a0};
}

std::vector<double> WelchPeriodogram(std::span<const double> signal,
                                     size_t segment) {
  RealFft fft(segment);
  const std::vector<double> window = HannWindow(segment);
  const size_t hop = std::max<size_t>(1, segment / 2);
  std::vector<double> psd(fft.num_bins(), 0.0);
  std::vector<double> frame(segment);
  std::vector<Complex> bins;
  size_t frames = 0;
  for (size_t start = 0;
       frames == 0 || start + segment <= signal.size(); start += hop) {
    for (size_t i = 0; i < segment; ++i) {
      const size_t k = start + i;
      frame[i] = k < signal.size() ? signal[k] * window[i] : 0.0;
    }
    fft.Forward(frame, bins);
    for (size_t b = 0; b < bins.size(); ++b) psd[b] += std::norm(bins[b]);
    ++frames;
  }
  for (double& p : psd) p /= static_cast<double>(frames);
  return psd;
}

double MeanSquare(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

double PowerDb(double power) {
  if (!(power > 0.0)) return -300.0;
  return std::max(-300.0, 10.0 * std::log10(power));
}

}  // namespace leakaudit::dsp
