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

#include "leakaudit/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "leakaudit/dsp.h"
#include "leakaudit/error.h"

namespace leakaudit {
namespace {

constexpr double kLogFloor = 1e-10;
constexpr double kConstantStd = 1e-10;

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

std::string_view FeatureOriginName(FeatureOrigin origin) {
  return origin == FeatureOrigin::kMfcc ? "mfcc" : "external";
}

FeatureOrigin ParseFeatureOrigin(std::string_view name) {
  if (name == "mfcc") return FeatureOrigin::kMfcc;
  if (name == "external") return FeatureOrigin::kExternal;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown feature '" + std::string(name) + "'");
}

MfccExtractor::MfccExtractor(const MfccOptions& options) : options_(options) {
  if (options_.rate <= 0 || options_.n_coeffs <= 0 ||
      options_.n_mels < options_.n_coeffs || options_.window_s <= 0.0 ||
      options_.hop_s <= 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "invalid MFCC options");
  }
  window_length_ =
      static_cast<size_t>(std::llround(options_.window_s * options_.rate));
  hop_length_ = static_cast<size_t>(std::llround(options_.hop_s * options_.rate));
  fft_size_ = options_.fft_size ? options_.fft_size
                                : dsp::NextPowerOfTwo(window_length_);
  if (fft_size_ < window_length_) {
    throw Error(ErrorKind::kInvalidConfig, "fft_size shorter than window");
  }
  window_ = dsp::HannWindow(window_length_);

  const size_t bins = fft_size_ / 2 + 1;
  const int m = options_.n_mels;
  const double top_mel = HzToMel(options_.rate / 2.0);
  std::vector<double> edges(m + 2);
  for (int i = 0; i < m + 2; ++i) edges[i] = MelToHz(top_mel * i / (m + 1));
  mel_ = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(bins));
  for (int f = 0; f < m; ++f) {
    for (size_t b = 0; b < bins; ++b) {
      const double hz = static_cast<double>(b) * options_.rate / fft_size_;
      const double rise = (hz - edges[f]) / (edges[f + 1] - edges[f]);
      const double fall = (edges[f + 2] - hz) / (edges[f + 2] - edges[f + 1]);
      mel_(f, static_cast<Eigen::Index>(b)) =
          std::max(0.0, std::min(rise, fall));
    }
  }

  dct_.resize(options_.n_coeffs, m);
  for (int k = 0; k < options_.n_coeffs; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
    for (int j = 0; j < m; ++j) {
      dct_(k, j) = scale * std::cos(std::numbers::pi * k * (j + 0.5) / m);
    }
  }
}

Eigen::MatrixXd MfccExtractor::Extract(std::span<const double> samples) const {
  if (samples.size() < window_length_) {
    throw Error(ErrorKind::kTooShort, "span shorter than one MFCC window");
  }
  const size_t frames = (samples.size() - window_length_) / hop_length_ + 1;
  dsp::RealFft fft(fft_size_);
  std::vector<double> frame(window_length_);
  std::vector<dsp::Complex> bins;
  Eigen::VectorXd power(static_cast<Eigen::Index>(fft.num_bins()));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(frames), options_.n_coeffs);
  const double alpha = options_.preemphasis;
  for (size_t f = 0; f < frames; ++f) {
    const size_t start = f * hop_length_;
    for (size_t i = 0; i < window_length_; ++i) {
      const size_t k = start + i;
      const double prev = k > 0 ? samples[k - 1] : 0.0;
      frame[i] = (samples[k] - alpha * prev) * window_[i];
    }
    fft.Forward(frame, bins);
    for (size_t b = 0; b < bins.size(); ++b) {
      power[static_cast<Eigen::Index>(b)] = std::norm(bins[b]);
    }
    Eigen::VectorXd log_mel = (mel_ * power).array().max(kLogFloor).log();
    out.row(static_cast<Eigen::Index>(f)) = (dct_ * log_mel).transpose();
  }
  return out;
}

FeatureSequence Mfcc(const AudioSample& sample, const MfccOptions& options) {
  MfccOptions opts = options;
  opts.rate = sample.rate;
  const MfccExtractor extractor(opts);
  FeatureSequence out;
  out.frames = extractor.Extract(sample.samples);
  out.hop_s = opts.hop_s;
  out.origin = FeatureOrigin::kMfcc;
  return out;
}

FeatureSequence ZNormalize(FeatureSequence features) {
  const Eigen::Index n = features.n_frames();
  if (n < 2) {
    throw Error(ErrorKind::kTooFewFrames,
                "normalization needs >= 2 frames, got " + std::to_string(n));
  }
  for (Eigen::Index d = 0; d < features.dim(); ++d) {
    auto col = features.frames.col(d);
    const double mean = col.mean();
    col.array() -= mean;
    const double stdev = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    if (stdev < kConstantStd) {
      col.setZero();
    } else {
      col /= stdev;
    }
  }
  return features;
}

FeatureSequence ExtractOverRegions(const AudioSample& sample,
                                   const RegionSet& regions,
                                   const FeatureExtractor& extractor,
                                   size_t* dropped) {
  const auto min_samples =
      static_cast<int64_t>(std::llround(extractor.window_s() * sample.rate));
  const auto total = static_cast<int64_t>(sample.samples.size());
  std::vector<Eigen::MatrixXd> blocks;
  size_t skipped = 0;
  Eigen::Index rows = 0;
  for (const Interval& iv : regions.intervals()) {
    const int64_t begin =
        std::clamp<int64_t>(std::llround(iv.start_s * sample.rate), 0, total);
    const int64_t end =
        std::clamp<int64_t>(std::llround(iv.end_s * sample.rate), 0, total);
    if (end - begin < min_samples) {
      ++skipped;
      continue;
    }
    blocks.push_back(extractor.Extract(std::span(sample.samples)
                                           .subspan(static_cast<size_t>(begin),
                                                    static_cast<size_t>(end - begin))));
    rows += blocks.back().rows();
  }
  if (dropped != nullptr) *dropped = skipped;
  if (blocks.empty()) {
    throw Error(ErrorKind::kEmptyRegions,
                "no interval of " + sample.source_path +
                    " is long enough for one feature window");
  }
  FeatureSequence out;
  out.hop_s = extractor.hop_s();
  out.origin = extractor.origin();
  out.frames.resize(rows, extractor.dim());
  Eigen::Index row = 0;
  for (const Eigen::MatrixXd& block : blocks) {
    out.frames.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  return ZNormalize(std::move(out));
}

FeatureSequence EmbeddingsToFeatures(const EmbeddingFile& file,
                                     const RegionSet& regions) {
  if (file.region_fingerprint != regions.Fingerprint()) {
    throw Error(ErrorKind::kRegionFingerprintMismatch,
                "embedding file fingerprint " +
                    FingerprintHex(file.region_fingerprint) +
                    " != current regions " +
                    FingerprintHex(regions.Fingerprint()));
  }
  Eigen::Index rows = 0;
  int64_t last_index = -1;
  for (const EmbeddingBlock& block : file.blocks) {
    if (block.region_index >= regions.size() ||
        static_cast<int64_t>(block.region_index) <= last_index) {
      throw Error(ErrorKind::kFormatMismatch,
                  "block region index " + std::to_string(block.region_index) +
                      " out of order or out of range");
    }
    last_index = block.region_index;
    rows += block.frame_count;
  }
  if (rows == 0) {
    throw Error(ErrorKind::kEmptyRegions, "embedding file has no frames");
  }
  FeatureSequence out;
  out.origin = FeatureOrigin::kExternal;
  out.hop_s = file.hop_us * 1e-6;
  out.frames.resize(rows, file.dim);
  Eigen::Index row = 0;
  for (const EmbeddingBlock& block : file.blocks) {
    for (uint32_t f = 0; f < block.frame_count; ++f, ++row) {
      for (uint32_t d = 0; d < file.dim; ++d) {
        out.frames(row, d) = block.values[size_t{f} * file.dim + d];
      }
    }
  }
  return out;
}

FeatureSequence LoadEmbeddings(const std::string& path,
                               const RegionSet& regions) {
  return EmbeddingsToFeatures(ReadEmbeddingFile(path), regions);
}

EmbeddingFile FeaturesToEmbeddingFile(
    const std::vector<Eigen::MatrixXd>& blocks,
    const std::vector<uint32_t>& region_indices, double hop_s,
    uint64_t region_fingerprint) {
  if (blocks.size() != region_indices.size()) {
    throw Error(ErrorKind::kFormatMismatch, "one region index per block");
  }
  EmbeddingFile file;
  file.hop_us = static_cast<uint32_t>(std::llround(hop_s * 1e6));
  file.region_fingerprint = region_fingerprint;
  file.dim = blocks.empty() ? 1 : static_cast<uint32_t>(blocks[0].cols());
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (static_cast<uint32_t>(blocks[b].cols()) != file.dim) {
      throw Error(ErrorKind::kFormatMismatch, "blocks differ in dimension");
    }
    EmbeddingBlock block;
    block.region_index = region_indices[b];
    block.frame_count = static_cast<uint32_t>(blocks[b].rows());
    block.values.reserve(block.frame_count * size_t{file.dim});
    for (Eigen::Index r = 0; r < blocks[b].rows(); ++r) {
      for (Eigen::Index c = 0; c < blocks[b].cols(); ++c) {
        block.values.push_back(static_cast<float>(blocks[b](r, c)));
      }
    }
    file.blocks.push_back(std::move(block));
  }
  return file;
}

ProbeBand ParseProbeBand(std::string_view text) {
  const size_t colon = text.find(':');
  ProbeBand band;
  try {
    if (colon == std::string_view::npos) throw std::invalid_argument("colon");
    size_t used = 0;
    const std::string lo(text.substr(0, colon)), hi(text.substr(colon + 1));
    band.low_hz = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    band.high_hz = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidConfig,
                "band must be LOW:HIGH in Hz, got '" + std::string(text) + "'");
  }
  if (!(band.low_hz >= 0.0 && band.low_hz < band.high_hz)) {
    throw Error(ErrorKind::kInvalidConfig, "band needs 0 <= low < high");
  }
  return band;
}

double NoiseFloorProbe(const AudioSample& sample, const ProbeBand& band) {
  if (!(band.low_hz >= 0.0 && band.low_hz < band.high_hz)) {
    throw Error(ErrorKind::kInvalidConfig, "band needs 0 <= low < high");
  }
  if (2.0 * band.high_hz > sample.rate) {
    throw Error(ErrorKind::kBandAboveNyquist,
                "band up to " + std::to_string(band.high_hz) +
                    " Hz exceeds Nyquist of " + std::to_string(sample.rate) +
                    " Hz audio (" + sample.source_path + ")");
  }
  // ~20 Hz resolution at any rate.
  const size_t segment =
      dsp::NextPowerOfTwo(static_cast<size_t>(std::max(64, sample.rate / 22)));
  const std::vector<double> psd = dsp::WelchPeriodogram(sample.samples, segment);
  const double bin_hz = static_cast<double>(sample.rate) / segment;
  double in_band = 0.0, total = 0.0;
  for (size_t b = 0; b < psd.size(); ++b) {
    total += psd[b];
    const double hz = b * bin_hz;
    if (hz >= band.low_hz && hz <= band.high_hz) in_band += psd[b];
  }
  if (!(total > 0.0)) return -300.0;
  return std::min(0.0, dsp::PowerDb(in_band / total));
}

}  // namespace leakaudit
