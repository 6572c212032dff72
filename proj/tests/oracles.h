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

// Independent reference computations used only by tests. Nothing here calls
// into the library's DSP, statistics or training code.

#ifndef LEAKAUDIT_TESTS_ORACLES_H_
#define LEAKAUDIT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

namespace leakaudit::oracle {

inline constexpr double kPi = std::numbers::pi;

// |X_k|^2 for k = 0 .. n_fft / 2 by direct summation; x is zero-padded.
inline std::vector<double> DftPower(std::span<const double> x, size_t n_fft) {
  std::vector<double> out(n_fft / 2 + 1);
  for (size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (size_t n = 0; n < std::min(x.size(), n_fft); ++n) {
      const double ph = -2.0 * kPi * static_cast<double>(k * n % n_fft) /
                        static_cast<double>(n_fft);
      acc += x[n] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    out[k] = std::norm(acc);
  }
  return out;
}

// Averaged power spectrum over non-overlapping Hann-windowed segments.
inline std::vector<double> AveragedPower(std::span<const double> x,
                                         size_t seg) {
  std::vector<double> acc(seg / 2 + 1, 0.0);
  std::vector<double> buf(seg);
  size_t count = 0;
  for (size_t s = 0; s + seg <= x.size(); s += seg) {
    for (size_t n = 0; n < seg; ++n) {
      buf[n] = x[s + n] * (0.5 - 0.5 * std::cos(2.0 * kPi * n / seg));
    }
    const auto p = DftPower(buf, seg);
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
    ++count;
  }
  for (double& v : acc) v /= std::max<size_t>(count, 1);
  return acc;
}

// Fraction of power between lo and hi Hz, in dB.
inline double BandFractionDb(std::span<const double> x, int rate, double lo,
                             double hi, size_t seg = 256) {
  const auto p = AveragedPower(x, seg);
  double band = 0.0, total = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(seg);
    total += p[k];
    if (f >= lo && f <= hi) band += p[k];
  }
  return 10.0 * std::log10(std::max(band, 1e-300) / total);
}

// Frequency and amplitude of the strongest bin of a Hann-windowed,
// heavily zero-padded DFT.
struct Peak {
  double hz = 0.0;
  double amplitude = 0.0;
};

inline Peak SinePeak(std::span<const double> x, int rate, double lo_hz,
                     double hi_hz, double step_hz = 0.25) {
  Peak best;
  double wsum = 0.0;
  std::vector<double> w(x.size());
  for (size_t n = 0; n < x.size(); ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / static_cast<double>(x.size()));
    wsum += w[n];
  }
  for (double f = lo_hz; f <= hi_hz; f += step_hz) {
    std::complex<double> acc = 0.0;
    for (size_t n = 0; n < x.size(); ++n) {
      const double ph = -2.0 * kPi * f * static_cast<double>(n) / rate;
      acc += x[n] * w[n] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    const double amp = 2.0 * std::abs(acc) / wsum;
    if (amp > best.amplitude) best = {f, amp};
  }
  return best;
}

inline double RmsDb(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return 10.0 * std::log10(s / static_cast<double>(x.size()) + 1e-300);
}

// All-pairs concordance: P(score_pos > score_neg) + 0.5 P(tie).
inline double BruteAuc(std::span<const double> scores,
                       std::span<const int> labels) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      den += 1.0;
      if (scores[i] > scores[j]) {
        num += 1.0;
      } else if (scores[i] == scores[j]) {
        num += 0.5;
      }
    }
  }
  return num / den;
}

// One MFCC frame computed directly: `frame` holds the window samples and
// `prev` the sample before the window (0 at signal start).
inline std::vector<double> MfccFrame(std::span<const double> frame,
                                     double prev, int rate, int n_mels = 40,
                                     int n_coeffs = 20, size_t n_fft = 512,
                                     double alpha = 0.97) {
  const size_t n = frame.size();
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    const double before = i == 0 ? prev : frame[i - 1];
    const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * i / static_cast<double>(n));
    x[i] = (frame[i] - alpha * before) * hann;
  }
  const auto power = DftPower(x, n_fft);
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> log_mel(n_mels);
  for (int m = 0; m < n_mels; ++m) {
    const double top = mel(rate / 2.0);
    const double lo = hz(top * m / (n_mels + 1));
    const double mid = hz(top * (m + 1) / (n_mels + 1));
    const double hi = hz(top * (m + 2) / (n_mels + 1));
    double e = 0.0;
    for (size_t k = 0; k < power.size(); ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(n_fft);
      double weight = 0.0;
      if (f > lo && f <= mid) weight = (f - lo) / (mid - lo);
      if (f > mid && f < hi) weight = (hi - f) / (hi - mid);
      e += weight * power[k];
    }
    log_mel[m] = std::log(std::max(e, 1e-10));
  }
  std::vector<double> c(n_coeffs);
  for (int k = 0; k < n_coeffs; ++k) {
    double s = 0.0;
    for (int m = 0; m < n_mels; ++m) {
      s += log_mel[m] * std::cos(kPi * k * (m + 0.5) / n_mels);
    }
    c[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / n_mels);
  }
  return c;
}

// Two-sided exact-ish permutation test on the difference of means.
inline double PermutationPValue(std::vector<double> a, std::vector<double> b,
                                int rounds = 5000, uint32_t seed = 7) {
  auto mean = [](const std::vector<double>& v, size_t from, size_t to) {
    double s = 0.0;
    for (size_t i = from; i < to; ++i) s += v[i];
    return s / static_cast<double>(to - from);
  };
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const double observed =
      std::abs(mean(all, 0, a.size()) - mean(all, a.size(), all.size()));
  std::mt19937 gen(seed);
  int extreme = 0;
  for (int r = 0; r < rounds; ++r) {
    std::shuffle(all.begin(), all.end(), gen);
    const double d =
        std::abs(mean(all, 0, a.size()) - mean(all, a.size(), all.size()));
    if (d >= observed - 1e-15) ++extreme;
  }
  return (1.0 + extreme) / (1.0 + rounds);
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("leakaudit_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace leakaudit::oracle

#endif  // LEAKAUDIT_TESTS_ORACLES_H_
