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

#include <random>

#include <gtest/gtest.h>

#include "leakaudit/audio.h"
#include "leakaudit/error.h"
#include "oracles.h"

namespace leakaudit {
namespace {

constexpr int kRate = 16000;

AudioSample Make(std::vector<double> x, int rate = kRate) {
  AudioSample s;
  s.samples = std::move(x);
  s.rate = s.original_rate = rate;
  return s;
}

std::vector<double> Noise(double sigma, size_t n, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = g(gen);
  return x;
}

std::vector<double> Sine(double hz, double amp, size_t n, int rate = kRate) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * oracle::kPi * hz * i / rate);
  }
  return x;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::kEmpty;
}

double FrameRelError(const Eigen::MatrixXd& frames, Eigen::Index row,
                     const std::vector<double>& expected) {
  double err = 0.0, scale = 0.0;
  for (size_t k = 0; k < expected.size(); ++k) {
    err = std::max(err, std::abs(frames(row, static_cast<Eigen::Index>(k)) -
                                 expected[k]));
    scale = std::max(scale, std::abs(expected[k]));
  }
  return err / scale;
}

TEST(Mfcc, OneSecondGivesNinetyNineFrames) {
  const auto f = Mfcc(Make(Noise(0.1, 16000, 1)));
  EXPECT_EQ(f.n_frames(), 99);
  EXPECT_EQ(f.dim(), 20);
  EXPECT_DOUBLE_EQ(f.hop_s, 0.010);
  const MfccExtractor ex;
  EXPECT_EQ(ex.window_samples(), 320u);
  EXPECT_EQ(ex.hop_samples(), 160u);
  EXPECT_EQ(ex.fft_size(), 512u);
  EXPECT_EQ(ex.mel_filterbank().rows(), 40);
  EXPECT_EQ(ex.mel_filterbank().cols(), 257);
}

TEST(Mfcc, FrameCountFormula) {
  for (size_t n : {320u, 321u, 479u, 480u, 481u, 12345u}) {
    EXPECT_EQ(Mfcc(Make(Noise(0.1, n, 2))).n_frames(),
              static_cast<Eigen::Index>((n - 320) / 160 + 1));
  }
  EXPECT_EQ(KindOf([] { Mfcc(Make(Noise(0.1, 319, 2))); }),
            ErrorKind::kTooShort);
}

TEST(Mfcc, MatchesDirectOracleOnRandomFrames) {
  const auto x = Noise(0.2, 5 * kRate, 3);
  const auto f = Mfcc(Make(x));
  std::mt19937_64 gen(4);
  for (int t = 0; t < 100; ++t) {
    const auto row = static_cast<Eigen::Index>(gen() % f.n_frames());
    const size_t start = static_cast<size_t>(row) * 160;
    const auto expected = oracle::MfccFrame(
        std::span(x).subspan(start, 320), start > 0 ? x[start - 1] : 0.0, kRate);
    EXPECT_LT(FrameRelError(f.frames, row, expected), 1e-6) << row;
  }
}

TEST(Mfcc, SineIsStationary) {
  const auto x = Sine(1000, 1.0, kRate);
  const auto f = Mfcc(Make(x));
  const double c0 = f.frames(1, 0);
  for (Eigen::Index r = 1; r < f.n_frames(); ++r) {
    EXPECT_NEAR(f.frames(r, 0), c0, 1e-3);
  }
  for (Eigen::Index r : {0, 10, 98}) {
    const size_t start = static_cast<size_t>(r) * 160;
    const auto expected = oracle::MfccFrame(std::span(x).subspan(start, 320),
                                            start > 0 ? x[start - 1] : 0.0, kRate);
    EXPECT_LT(FrameRelError(f.frames, r, expected), 1e-6);
  }
}

TEST(Mfcc, ConstantSignalFramesIdentical) {
  const auto f = Mfcc(Make(std::vector<double>(8000, 0.0)));
  for (Eigen::Index r = 1; r < f.n_frames(); ++r) {
    EXPECT_EQ(f.frames.row(r), f.frames.row(0));
  }
}

TEST(Mfcc, ScalingShiftsOnlyC0) {
  const auto x = Noise(0.1, kRate, 5);
  std::vector<double> y = x;
  for (double& v : y) v *= 0.25;
  const auto a = Mfcc(Make(x));
  const auto b = Mfcc(Make(y));
  const double shift = a.frames(0, 0) - b.frames(0, 0);
  EXPECT_NEAR(shift, 2.0 * std::log(4.0) * std::sqrt(40.0), 1e-6);
  for (Eigen::Index r = 0; r < a.n_frames(); ++r) {
    EXPECT_NEAR(a.frames(r, 0) - b.frames(r, 0), shift, 1e-6);
    for (Eigen::Index c = 1; c < a.dim(); ++c) {
      ASSERT_NEAR(a.frames(r, c), b.frames(r, c), 1e-6);
    }
  }
}

TEST(ZNormalize, HandCases) {
  FeatureSequence f;
  f.frames.resize(2, 1);
  f.frames << 1, 3;
  const auto n = ZNormalize(f);
  EXPECT_DOUBLE_EQ(n.frames(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(n.frames(1, 0), 1.0);
  FeatureSequence c;
  c.frames = Eigen::MatrixXd::Constant(3, 1, 5.0);
  EXPECT_TRUE(ZNormalize(c).frames.isZero(0.0));
  FeatureSequence one;
  one.frames = Eigen::MatrixXd::Ones(1, 4);
  EXPECT_EQ(KindOf([&] { ZNormalize(one); }), ErrorKind::kTooFewFrames);
}

TEST(ZNormalize, RandomMatrixColumns) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-50.0, 80.0);
  FeatureSequence f;
  f.frames.resize(100, 20);
  for (Eigen::Index r = 0; r < 100; ++r) {
    for (Eigen::Index c = 0; c < 20; ++c) f.frames(r, c) = u(gen) * (c + 1);
  }
  const auto n = ZNormalize(f);
  for (Eigen::Index c = 0; c < 20; ++c) {
    const double mean = n.frames.col(c).mean();
    double var = 0.0;
    for (Eigen::Index r = 0; r < 100; ++r) {
      var += (n.frames(r, c) - mean) * (n.frames(r, c) - mean);
    }
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_NEAR(std::sqrt(var / 100.0), 1.0, 1e-10);
  }
}

TEST(ExtractOverRegions, TwoHalfSecondIntervals) {
  const AudioSample s = Make(Noise(0.1, 3 * kRate, 7));
  const RegionSet r(RegionKind::kSpeech, 3.0, {{0.2, 0.7}, {1.5, 2.0}});
  const MfccExtractor ex;
  size_t dropped = 99;
  const auto f = ExtractOverRegions(s, r, ex, &dropped);
  EXPECT_EQ(f.n_frames(), 98);
  EXPECT_EQ(dropped, 0u);
  EXPECT_EQ(f.origin, FeatureOrigin::kMfcc);
}

TEST(ExtractOverRegions, WholeSignalMatchesDirect) {
  const AudioSample s = Make(Noise(0.1, kRate, 8));
  const RegionSet all(RegionKind::kSpeech, 1.0, {{0.0, 1.0}});
  const auto f = ExtractOverRegions(s, all, MfccExtractor());
  const auto direct = ZNormalize(Mfcc(s));
  EXPECT_TRUE(f.frames.isApprox(direct.frames, 1e-12));
}

TEST(ExtractOverRegions, ShortIntervalsDropped) {
  const AudioSample s = Make(Noise(0.1, kRate, 9));
  const RegionSet tiny(RegionKind::kSpeech, 1.0,
                       {{0.1, 0.11}, {0.3, 0.315}, {0.5, 0.519}});
  EXPECT_EQ(KindOf([&] { ExtractOverRegions(s, tiny, MfccExtractor()); }),
            ErrorKind::kEmptyRegions);
  const RegionSet mixed(RegionKind::kSpeech, 1.0, {{0.1, 0.11}, {0.3, 0.6}});
  size_t dropped = 0;
  EXPECT_EQ(ExtractOverRegions(s, mixed, MfccExtractor(), &dropped).n_frames(),
            29);
  EXPECT_EQ(dropped, 1u);
}

TEST(ExtractOverRegions, RegionLocality) {
  // Loud context next to each interval must not leak into its frames.
  std::vector<double> x = Noise(0.05, 4 * kRate, 10);
  const RegionSet r(RegionKind::kSpeech, 4.0, {{0.5, 1.0}, {2.0, 2.7}});
  const MfccExtractor ex;
  const auto base = ExtractOverRegions(Make(x), r, ex);
  for (size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / kRate;
    const bool inside = (t >= 0.5 && t < 1.0) || (t >= 2.0 && t < 2.7);
    if (!inside) x[i] = 0.9 * std::sin(i * 0.3);
  }
  const auto changed = ExtractOverRegions(Make(x), r, ex);
  EXPECT_EQ(base.frames, changed.frames);

  // Reversing interval order permutes frame blocks.
  const Eigen::MatrixXd a = ex.Extract(std::span(x).subspan(8000, 8000));
  const Eigen::MatrixXd b = ex.Extract(std::span(x).subspan(32000, 11200));
  Eigen::MatrixXd ab(a.rows() + b.rows(), a.cols());
  ab << a, b;
  Eigen::MatrixXd ba(a.rows() + b.rows(), a.cols());
  ba << b, a;
  FeatureSequence fab{ab, 0.01}, fba{ba, 0.01};
  const auto nab = ZNormalize(fab).frames;
  const auto nba = ZNormalize(fba).frames;
  EXPECT_TRUE(nab.topRows(a.rows()).isApprox(nba.bottomRows(a.rows()), 1e-12));
  EXPECT_TRUE(changed.frames.isApprox(nab, 1e-12));
}

TEST(ExtractOverRegions, ScaleInvariantAfterNormalization) {
  std::vector<double> x = Noise(0.1, 2 * kRate, 11);
  const RegionSet r(RegionKind::kSpeech, 2.0, {{0.0, 0.8}, {1.1, 2.0}});
  const auto a = ExtractOverRegions(Make(x), r, MfccExtractor());
  for (double& v : x) v *= 0.05;
  const auto b = ExtractOverRegions(Make(x), r, MfccExtractor());
  EXPECT_LT((a.frames - b.frames).cwiseAbs().maxCoeff(), 1e-6);
}

EmbeddingFile TwoBlockFile(uint32_t dim, const RegionSet& regions,
                           uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::MatrixXd> blocks(2, Eigen::MatrixXd(10, dim));
  for (auto& b : blocks) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(gen);
  }
  return FeaturesToEmbeddingFile(blocks, {0, 1}, 0.02, regions.Fingerprint());
}

TEST(Embeddings, TwoBlocksOf768) {
  const RegionSet r(RegionKind::kSpeech, 5.0, {{0.0, 0.2}, {1.0, 1.2}});
  const EmbeddingFile file = TwoBlockFile(768, r, 1);
  const auto f = EmbeddingsToFeatures(file, r);
  EXPECT_EQ(f.n_frames(), 20);
  EXPECT_EQ(f.dim(), 768);
  EXPECT_DOUBLE_EQ(f.hop_s, 0.02);
  EXPECT_EQ(f.origin, FeatureOrigin::kExternal);
  EXPECT_EQ(f.frames(12, 5), static_cast<double>(file.blocks[1].values[2 * 768 + 5]));

  oracle::TempDir dir("emb");
  WriteEmbeddingFile(dir.file("a.leak"), file);
  EXPECT_EQ(LoadEmbeddings(dir.file("a.leak"), r).frames, f.frames);
}

TEST(Embeddings, FingerprintMismatch) {
  const RegionSet r(RegionKind::kSpeech, 5.0, {{0.0, 0.2}, {1.0, 1.2}});
  const RegionSet other(RegionKind::kSpeech, 5.0, {{0.0, 0.2}, {1.0, 1.3}});
  const EmbeddingFile file = TwoBlockFile(512, r, 2);
  EXPECT_EQ(KindOf([&] { EmbeddingsToFeatures(file, other); }),
            ErrorKind::kRegionFingerprintMismatch);
}

TEST(Embeddings, EmptyAndOutOfOrder) {
  const RegionSet r(RegionKind::kSpeech, 5.0, {{0.0, 0.2}, {1.0, 1.2}});
  EmbeddingFile empty;
  empty.dim = 768;
  empty.hop_us = 20000;
  empty.region_fingerprint = r.Fingerprint();
  EXPECT_EQ(KindOf([&] { EmbeddingsToFeatures(empty, r); }),
            ErrorKind::kEmptyRegions);
  EmbeddingFile swapped = TwoBlockFile(4, r, 3);
  std::swap(swapped.blocks[0], swapped.blocks[1]);
  EXPECT_EQ(KindOf([&] { EmbeddingsToFeatures(swapped, r); }),
            ErrorKind::kFormatMismatch);
}

TEST(Probe, WhiteNoiseBandFraction) {
  const AudioSample s = Make(Noise(0.1, 44100 * 3, 12), 44100);
  EXPECT_NEAR(NoiseFloorProbe(s), 10.0 * std::log10(2000.0 / 22050.0), 1.0);
}

TEST(Probe, LowPassedNoiseIsQuietInBand) {
  // Round trip through 22050 Hz cuts everything above ~11 kHz.
  const AudioSample wide = Make(Noise(0.1, 44100 * 3, 13), 44100);
  const AudioSample narrow = Resample(Resample(wide, 22050), 44100);
  EXPECT_LT(NoiseFloorProbe(narrow), -40.0);
}

TEST(Probe, ScaleInvariantAndBounded) {
  std::vector<double> x = Noise(0.1, 48000 * 2, 14);
  const double a = NoiseFloorProbe(Make(x, 48000));
  for (double& v : x) v *= 0.01;
  EXPECT_NEAR(NoiseFloorProbe(Make(x, 48000)), a, 1e-9);
  EXPECT_LE(a, 0.0);
}

TEST(Probe, Errors) {
  EXPECT_EQ(KindOf([] { NoiseFloorProbe(Make(Noise(0.1, 16000, 1))); }),
            ErrorKind::kBandAboveNyquist);
  EXPECT_EQ(KindOf([] { ParseProbeBand("14000"); }), ErrorKind::kInvalidConfig);
  EXPECT_EQ(KindOf([] { ParseProbeBand("9000:8000"); }),
            ErrorKind::kInvalidConfig);
  const ProbeBand b = ParseProbeBand("6000:7500");
  EXPECT_DOUBLE_EQ(b.low_hz, 6000.0);
  EXPECT_DOUBLE_EQ(b.high_hz, 7500.0);
}

TEST(Origins, Names) {
  EXPECT_EQ(ParseFeatureOrigin("mfcc"), FeatureOrigin::kMfcc);
  EXPECT_EQ(FeatureOriginName(FeatureOrigin::kExternal), "external");
  EXPECT_THROW(ParseFeatureOrigin("wav2vec"), Error);
}

}  // namespace
}  // namespace leakaudit
