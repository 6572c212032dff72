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

#include "leakaudit/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(const uint8_t* p) { return p[0] | (p[1] << 8); }

uint32_t ReadU32(const uint8_t* p) {
  return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) |
         (uint32_t{p[3]} << 24);
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

double DecodeFrameSample(const uint8_t* p, uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float f;
    uint32_t raw = ReadU32(p);
    std::memcpy(&f, &raw, sizeof(f));
    return f;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<int16_t>(ReadU16(p)) / 32768.0;
    case 24: {
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    case 32:
      return static_cast<int32_t>(ReadU32(p)) / 2147483648.0;
  }
  return 0.0;
}

}  // namespace

AudioSample DecodeWavBytes(std::span<const uint8_t> bytes,
                           const std::string& source_path) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kUnsupportedFormat,
                source_path + " is not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error(ErrorKind::kCorruptFile, source_path + ": short fmt chunk");
      }
      const uint8_t* f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      block_align = ReadU16(f + 12);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) {
          throw Error(ErrorKind::kCorruptFile,
                      source_path + ": short extensible fmt chunk");
        }
        format = ReadU16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streams written without a final size often carry 0 or 0xFFFFFFFF.
      data_size = std::min<size_t>(size, bytes.size() - body);
      if (size != 0xFFFFFFFF && body + size > bytes.size()) {
        throw Error(ErrorKind::kCorruptFile,
                    source_path + ": data chunk truncated");
      }
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data == nullptr) {
    throw Error(ErrorKind::kCorruptFile,
                source_path + ": missing fmt or data chunk");
  }
  const bool int_ok = format == kFormatPcm &&
                      (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && bits == 32;
  if (!int_ok && !float_ok) {
    throw Error(ErrorKind::kUnsupportedFormat,
                source_path + ": format " + std::to_string(format) + " with " +
                    std::to_string(bits) + " bits");
  }
  if (channels == 0 || rate == 0 ||
      block_align != channels * (bits / 8)) {
    throw Error(ErrorKind::kCorruptFile, source_path + ": inconsistent header");
  }

  const size_t frames = data_size / block_align;
  if (frames == 0) {
    throw Error(ErrorKind::kCorruptFile, source_path + ": no audio frames");
  }
  AudioSample out;
  out.source_path = source_path;
  out.rate = static_cast<int>(rate);
  out.original_rate = out.rate;
  out.channels_collapsed = channels > 1;
  out.samples.resize(frames);
  const int width = bits / 8;
  for (size_t i = 0; i < frames; ++i) {
    const uint8_t* frame = data + i * block_align;
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double v = DecodeFrameSample(frame + c * width, format, bits);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kCorruptFile,
                    source_path + ": non-finite sample");
      }
      acc += v;
    }
    out.samples[i] = std::clamp(acc / channels, -1.0, 1.0);
  }
  return out;
}

AudioSample DecodeWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DecodeWavBytes(bytes, path);
}

std::vector<uint8_t> EncodeWav(std::span<const double> samples, int rate,
                               WavEncoding encoding, int channels) {
  const int bits = encoding == WavEncoding::kPcm24 ? 24
                                                  : (encoding ==
                                                     WavEncoding::kPcm16
                                                         ? 16
                                                         : 32);
  const int width = bits / 8;
  const uint32_t data_size = static_cast<uint32_t>(samples.size() * width);
  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_size);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm);
  PutU16(out, static_cast<uint16_t>(channels));
  PutU32(out, static_cast<uint32_t>(rate));
  PutU32(out, static_cast<uint32_t>(rate * channels * width));
  PutU16(out, static_cast<uint16_t>(channels * width));
  PutU16(out, static_cast<uint16_t>(bits));
  PutTag(out, "data");
  PutU32(out, data_size);
  for (double s : samples) {
    if (encoding == WavEncoding::kFloat32) {
      const float f = static_cast<float>(s);
      uint32_t raw;
      std::memcpy(&raw, &f, sizeof(raw));
      PutU32(out, raw);
      continue;
    }
    const double scale = encoding == WavEncoding::kPcm16 ? 32768.0 : 8388608.0;
    const double lo = -scale, hi = scale - 1.0;
    const auto v = static_cast<int32_t>(
        std::clamp(std::nearbyint(s * scale), lo, hi));
    for (int b = 0; b < width; ++b) out.push_back((v >> (8 * b)) & 0xFF);
  }
  return out;
}

void WriteWav(const std::string& path, std::span<const double> samples,
              int rate, WavEncoding encoding) {
  const std::vector<uint8_t> bytes = EncodeWav(samples, rate, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Resampling.

namespace {

constexpr double kStopbandDb = 80.0;
// Passband ends at 90% of the lower Nyquist; the stopband starts at it.
constexpr double kPassbandFraction = 0.90;
// Phase tables above this many phases are replaced by direct evaluation.
constexpr int64_t kMaxTablePhases = 4096;

double BesselI0(double x) {
  const double half = x / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
}

// Windowed-sinc low-pass evaluated at an offset measured in input samples.
class SincKernel {
 public:
  SincKernel(int64_t up, int64_t down) {
    const double nyquist = 0.5 * std::min(1.0, static_cast<double>(up) / down);
    const double transition = (1.0 - kPassbandFraction) * nyquist;
    cutoff_ = nyquist - transition / 2.0;
    beta_ = 0.1102 * (kStopbandDb - 8.7);
    const double order = (kStopbandDb - 7.95) /
                         (2.285 * 2.0 * std::numbers::pi * transition);
    half_width_ = std::ceil(order / 2.0);
    i0_beta_ = BesselI0(beta_);
  }

  double half_width() const { return half_width_; }

  double operator()(double t) const {
    const double r = t / half_width_;
    if (std::abs(r) > 1.0) return 0.0;
    const double w = BesselI0(beta_ * std::sqrt(1.0 - r * r)) / i0_beta_;
    return 2.0 * cutoff_ * Sinc(2.0 * cutoff_ * t) * w;
  }

 private:
  double cutoff_;
  double beta_;
  double half_width_;
  double i0_beta_;
};

}  // namespace

AudioSample Resample(const AudioSample& sample, int target_rate) {
  if (target_rate <= 0 || sample.rate <= 0) {
    throw Error(ErrorKind::kInvalidRate,
                "rates must be positive (got " + std::to_string(sample.rate) +
                    " -> " + std::to_string(target_rate) + ")");
  }
  if (target_rate == sample.rate) return sample;

  const int64_t g = std::gcd<int64_t>(sample.rate, target_rate);
  const int64_t up = target_rate / g;
  const int64_t down = sample.rate / g;
  const auto in_len = static_cast<int64_t>(sample.samples.size());
  const int64_t out_len = (in_len * up + down - 1) / down;

  const SincKernel kernel(up, down);
  const auto half = static_cast<int64_t>(kernel.half_width());
  const int64_t taps = 2 * half + 1;

  // Output n sits at input time n * down / up = base + phase / up. Tap j of
  // the phase weights x[base - half + j] at offset (phase / up) + half - j.
  const bool use_table = up <= kMaxTablePhases;
  std::vector<double> table;
  if (use_table) {
    table.resize(static_cast<size_t>(up * taps));
    for (int64_t p = 0; p < up; ++p) {
      double* row = &table[static_cast<size_t>(p * taps)];
      double sum = 0.0;
      for (int64_t j = 0; j < taps; ++j) {
        row[j] = kernel(static_cast<double>(p) / up + half - j);
        sum += row[j];
      }
      for (int64_t j = 0; j < taps; ++j) row[j] /= sum;
    }
  }

  AudioSample out = sample;
  out.rate = target_rate;
  out.samples.assign(static_cast<size_t>(out_len), 0.0);
  std::vector<double> row_scratch(use_table ? 0 : taps);
  const double* x = sample.samples.data();
  for (int64_t n = 0; n < out_len; ++n) {
    const int64_t pos = n * down;
    const int64_t base = pos / up;
    const int64_t phase = pos % up;
    const double* row;
    if (use_table) {
      row = &table[static_cast<size_t>(phase * taps)];
    } else {
      double sum = 0.0;
      for (int64_t j = 0; j < taps; ++j) {
        row_scratch[j] = kernel(static_cast<double>(phase) / up + half - j);
        sum += row_scratch[j];
      }
      for (double& v : row_scratch) v /= sum;
      row = row_scratch.data();
    }
    const int64_t first = base - half;
    const int64_t j0 = std::max<int64_t>(0, -first);
    const int64_t j1 = std::min<int64_t>(taps, in_len - first);
    double acc = 0.0;
    for (int64_t j = j0; j < j1; ++j) acc += row[j] * x[first + j];
    out.samples[static_cast<size_t>(n)] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

AudioSample Homogenize(const AudioSample& sample, int intermediate_rate,
                       int target_rate) {
  if (intermediate_rate <= 0 || target_rate <= 0) {
    throw Error(ErrorKind::kInvalidRate, "rates must be positive");
  }
  if (intermediate_rate != sample.rate &&
      intermediate_rate > std::min(sample.rate, target_rate)) {
    throw Error(ErrorKind::kInvalidRate,
                "intermediate rate " + std::to_string(intermediate_rate) +
                    " exceeds min(input, target)");
  }
  return Resample(Resample(sample, intermediate_rate), target_rate);
}

}  // namespace leakaudit
