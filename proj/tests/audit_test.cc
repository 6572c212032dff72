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

#include "leakaudit/audit.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "leakaudit/audio.h"
#include "leakaudit/error.h"
#include "leakaudit/report.h"
#include "leakaudit/synthgen.h"
#include "oracles.h"

namespace leakaudit {
namespace {

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::kEmpty;
}

std::vector<int> Labels(int n0, int n1) {
  std::vector<int> labels(n0, 0);
  labels.insert(labels.end(), n1, 1);
  return labels;
}

TEST(StratifiedFolds, EightPlusEight) {
  const auto labels = Labels(8, 8);
  const auto folds = StratifiedFolds(labels, 8, 3);
  ASSERT_EQ(folds.size(), 8u);
  for (const auto& f : folds) {
    ASSERT_EQ(f.size(), 2u);
    EXPECT_NE(labels[f[0]], labels[f[1]]);
  }
}

TEST(StratifiedFolds, PartitionAndProportions) {
  const auto labels = Labels(77, 81);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto folds = StratifiedFolds(labels, 8, seed);
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : folds) {
      EXPECT_GE(f.size(), 19u);
      EXPECT_LE(f.size(), 20u);
      int n1 = 0;
      for (size_t i : f) {
        ++seen[i];
        n1 += labels[i];
      }
      const double n0 = static_cast<double>(f.size()) - n1;
      EXPECT_LE(std::abs(n0 - 77.0 / 8.0), 1.0);
      EXPECT_LE(std::abs(n1 - 81.0 / 8.0), 1.0);
      EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    }
    for (int s : seen) EXPECT_EQ(s, 1);
  }
  EXPECT_EQ(StratifiedFolds(labels, 8, 4), StratifiedFolds(labels, 8, 4));
  EXPECT_NE(StratifiedFolds(labels, 8, 4), StratifiedFolds(labels, 8, 5));
}

TEST(StratifiedFolds, Errors) {
  EXPECT_EQ(KindOf([] { StratifiedFolds(Labels(5, 0), 8, 0); }),
            ErrorKind::kTooFewSamples);
  EXPECT_EQ(KindOf([] { StratifiedFolds(Labels(10, 7), 8, 0); }),
            ErrorKind::kTooFewSamples);
  EXPECT_EQ(KindOf([] { StratifiedFolds(Labels(10, 10), 1, 0); }),
            ErrorKind::kInvalidConfig);
}

TEST(Auc, HandCases) {
  const std::vector<double> s = {0.8, 0.4, 0.6, 0.2};
  const std::vector<int> l = {1, 1, 0, 0};
  EXPECT_EQ(Auc(s, l), 0.75);
  EXPECT_EQ(Auc(std::vector<double>{0.1, 0.2, 0.9, 0.95}, l), 0.0);
  EXPECT_EQ(Auc(std::vector<double>{0.9, 0.95, 0.1, 0.2}, l), 1.0);
  EXPECT_EQ(Auc(std::vector<double>(4, 0.3), l), 0.5);
  EXPECT_EQ(KindOf([] { Auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}); }),
            ErrorKind::kSingleClass);
  EXPECT_EQ(KindOf([] { Auc(std::vector<double>{0.1}, std::vector<int>{1, 0}); }),
            ErrorKind::kDimMismatch);
}

TEST(Auc, MatchesBruteForceAndMonotoneTransforms) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 1000; ++t) {
    const size_t n = 2 + gen() % 29;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) {
      // Coarse grid so ties are common.
      scores[i] = static_cast<double>(gen() % 12) / 11.0;
      labels[i] = static_cast<int>(gen() % 2);
    }
    labels[0] = 0;
    labels[1] = 1;
    const double a = Auc(scores, labels);
    ASSERT_NEAR(a, oracle::BruteAuc(scores, labels), 1e-12);
    std::vector<double> warped(n);
    for (size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * scores[i]) - 7.0;
    ASSERT_NEAR(Auc(warped, labels), a, 1e-12);
  }
}

TEST(BoxStats, Examples) {
  const auto two = ComputeBoxStats(std::vector<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(two.median, 0.5);
  EXPECT_DOUBLE_EQ(two.mean, 0.5);
  const auto five = ComputeBoxStats(std::vector<double>{5, 3, 1, 4, 2});
  EXPECT_DOUBLE_EQ(five.q1, 2.0);
  EXPECT_DOUBLE_EQ(five.median, 3.0);
  EXPECT_DOUBLE_EQ(five.q3, 4.0);
  EXPECT_DOUBLE_EQ(five.min, 1.0);
  EXPECT_DOUBLE_EQ(five.max, 5.0);
  const auto one = ComputeBoxStats(std::vector<double>{0.7});
  for (double v : {one.min, one.q1, one.median, one.q3, one.max, one.mean}) {
    EXPECT_DOUBLE_EQ(v, 0.7);
  }
  const auto four = ComputeBoxStats(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(four.q1, 1.75);
  EXPECT_DOUBLE_EQ(four.median, 2.5);
  EXPECT_EQ(KindOf([] { ComputeBoxStats({}); }), ErrorKind::kEmpty);
}

TEST(Verdict, Rule) {
  EXPECT_EQ(DecideVerdict(0.01, 0.9, 10), Verdict::kLeakageDetected);
  EXPECT_EQ(DecideVerdict(0.3, 0.5, 10), Verdict::kNoEvidence);
  EXPECT_EQ(DecideVerdict(0.01, 0.52, 10), Verdict::kInconclusive);
  EXPECT_EQ(DecideVerdict(0.3, 0.6, 10), Verdict::kInconclusive);
  EXPECT_EQ(DecideVerdict(0.05, 0.5, 10), Verdict::kNoEvidence);
  EXPECT_EQ(DecideVerdict(0.01, 0.55, 10), Verdict::kInconclusive);
  EXPECT_EQ(DecideVerdict(0.3, 0.5, 1), Verdict::kInconclusive);
  EXPECT_EQ(DecideVerdict(0.01, 0.9, 1), Verdict::kLeakageDetected);
  EXPECT_EQ(VerdictName(Verdict::kNoEvidence), "no-evidence");
}

TEST(AuditConfig, Validation) {
  AuditConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.Signature(), "mfcc_orig_non_speech_vad");
  c.regions = RegionKind::kParticipant;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kMissingSpeakerLabels);
  c.segmentation = SegmentationSource::kManual;
  EXPECT_NO_THROW(c.Validate());
  c = {};
  c.n_permutations = 0;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidPermutationCount);
  c = {};
  c.k_folds = 1;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidConfig);
  c = {};
  c.n_seeds = 0;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidConfig);
  c = {};
  c.intermediate_rate = 22050;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidConfig);
}

TEST(ParallelFor, CoversEveryIndexAndRethrowsLowest) {
  for (int jobs : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    ParallelFor(50, jobs, [&](size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
      ParallelFor(50, jobs, [](size_t i) {
        if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "7");
    }
  }
  EXPECT_GE(DefaultJobs(), 1);
}

// Samples whose chunks are Gaussian frames shifted by +-shift per class.
PreparedDataset FakeData(int per_class, double shift, uint64_t seed,
                         Eigen::Index dim = 4) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PreparedDataset data;
  for (int i = 0; i < 2 * per_class; ++i) {
    PreparedSample s;
    s.manifest_index = static_cast<size_t>(i);
    s.label = i % 2;
    for (int c = 0; c < 2; ++c) {
      Eigen::MatrixXd m(12, dim);
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        m.data()[k] = g(gen) + (s.label ? shift : -shift);
      }
      s.chunks.push_back(m);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

AuditConfig FastConfig() {
  AuditConfig c;
  c.n_seeds = 3;
  c.n_permutations = 19;
  c.train.epochs = 3;
  c.train.batch_size = 8;
  c.train.learning_rate = 3e-3;
  return c;
}

TEST(RunTrial, SeparableDataScoresHigh) {
  const PreparedDataset data = FakeData(16, 0.6, 1);
  const auto labels = data.Labels();
  const auto scores = RunTrial(data, labels, FastConfig(), 0);
  ASSERT_EQ(scores.size(), data.samples.size());
  for (double s : scores) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  EXPECT_GE(Auc(scores, labels), 0.9);
  EXPECT_EQ(RunTrial(data, labels, FastConfig(), 0), scores);
  EXPECT_NE(RunTrial(data, labels, FastConfig(), 1), scores);
}

TEST(RunTrial, RandomizedLabelsStayInBand) {
  const PreparedDataset data = FakeData(40, 0.6, 2);
  int inside = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<int> labels = data.Labels();
    std::mt19937_64 gen(seed);
    std::shuffle(labels.begin(), labels.end(), gen);
    const double auc = Auc(RunTrial(data, labels, FastConfig(), seed), labels);
    inside += auc >= 0.3 && auc <= 0.7;
  }
  EXPECT_EQ(inside, 10);
}

TEST(RunTrial, LabelCountMismatch) {
  const PreparedDataset data = FakeData(8, 0.5, 3);
  EXPECT_EQ(KindOf([&] { RunTrial(data, Labels(8, 7), FastConfig(), 0); }),
            ErrorKind::kDimMismatch);
}

TEST(SeedAucs, IndependentOfJobs) {
  const PreparedDataset data = FakeData(10, 0.2, 4);
  AuditConfig c = FastConfig();
  c.n_seeds = 4;
  const auto serial = SeedAucs(data, c);
  c.jobs = 3;
  EXPECT_EQ(SeedAucs(data, c), serial);
  c.seed_base = 1;
  c.jobs = 1;
  const auto shifted = SeedAucs(data, c);
  EXPECT_EQ(std::vector<double>(serial.begin() + 1, serial.end()),
            std::vector<double>(shifted.begin(), shifted.end() - 1));
}

TEST(PermutationTest, StrongSignalGivesSmallP) {
  const PreparedDataset data = FakeData(16, 0.8, 5);
  AuditConfig c = FastConfig();
  c.n_permutations = 99;
  const auto aucs = SeedAucs(data, c);
  const double median = ComputeBoxStats(aucs).median;
  const PermutationResult r = PermutationTest(data, c, median);
  EXPECT_EQ(r.aucs.size(), 99u);
  EXPECT_LE(r.p_value, 0.01);
}

TEST(PermutationTest, NullIsCalibrated) {
  int above = 0;
  for (uint64_t rep = 0; rep < 20; ++rep) {
    const PreparedDataset data = FakeData(12, 0.0, 100 + rep);
    AuditConfig c = FastConfig();
    c.n_permutations = 19;
    c.permutation_seed = 1000 + rep;
    c.seed_base = 10 * rep;
    const double median = ComputeBoxStats(SeedAucs(data, c)).median;
    above += PermutationTest(data, c, median).p_value > 0.05;
  }
  EXPECT_GE(above, 18);
}

TEST(PermutationTest, ZeroPermutationsRejected) {
  const PreparedDataset data = FakeData(8, 0.5, 6);
  AuditConfig c = FastConfig();
  c.n_permutations = 0;
  EXPECT_EQ(KindOf([&] { PermutationTest(data, c, 0.5); }),
            ErrorKind::kInvalidPermutationCount);
}

TEST(RunAuditPrepared, SingleSeedReport) {
  const PreparedDataset data = FakeData(8, 0.0, 7);
  AuditConfig c = FastConfig();
  c.n_seeds = 1;
  const AuditReport r = RunAuditPrepared(data, ProbeResult{}, 42, c);
  ASSERT_EQ(r.per_seed_auc.size(), 1u);
  EXPECT_EQ(r.box.min, r.box.max);
  EXPECT_EQ(r.box.median, r.per_seed_auc[0]);
  EXPECT_EQ(r.seeds, std::vector<uint64_t>{0});
  EXPECT_EQ(r.n_samples, 16u);
  EXPECT_EQ(r.n_per_class[0], 8u);
  EXPECT_EQ(r.verdict, r.permutation.p_value < 0.05 ? r.verdict
                                                    : Verdict::kInconclusive);
  EXPECT_EQ(r.verdict,
            DecideVerdict(r.permutation.p_value, r.box.median, 1));
}

TEST(RunAuditPrepared, ReportIsReproducible) {
  const PreparedDataset data = FakeData(8, 0.5, 8);
  const AuditConfig c = FastConfig();
  const AuditReport a = RunAuditPrepared(data, ProbeResult{}, 1, c);
  const AuditReport b = RunAuditPrepared(data, ProbeResult{}, 1, c);
  EXPECT_EQ(ReportJson(a), ReportJson(b));
  EXPECT_EQ(ReportMarkdown(a), ReportMarkdown(b));
  const auto stats = ComputeBoxStats(a.per_seed_auc);
  EXPECT_EQ(a.box.median, stats.median);
  for (double v : a.per_seed_auc) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

// Small synthetic corpus on disk plus a few broken entries.
class PrepareTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new oracle::TempDir("prepare");
    SynthSpec spec;
    spec.n_per_class = 3;
    spec.duration_s = 12.0;
    spec.seed = 4;
    manifest_ = new DatasetManifest(SynthDataset(spec, dir_->path().string()));
    std::ofstream(dir_->file("broken.wav")) << "RIFF....not audio";
    WriteWav(dir_->file("short.wav"), std::vector<double>(800, 0.01), 16000);
    WriteWav(dir_->file("narrow.wav"), std::vector<double>(8000 * 12, 0.0),
             8000);
    for (const char* name : {"broken.wav", "short.wav", "narrow.wav"}) {
      ManifestEntry e;
      e.audio_path = name;
      e.label = 1;
      e.speaker_id = name;
      manifest_->entries.push_back(e);
    }
  }
  static void TearDownTestSuite() {
    delete manifest_;
    delete dir_;
  }

  static oracle::TempDir* dir_;
  static DatasetManifest* manifest_;
};

oracle::TempDir* PrepareTest::dir_ = nullptr;
DatasetManifest* PrepareTest::manifest_ = nullptr;

TEST_F(PrepareTest, ExclusionsAreReported) {
  AuditConfig c;
  c.min_original_rate = 11025;
  const PreparedDataset data = PrepareDataset(*manifest_, c);
  EXPECT_EQ(data.samples.size(), 6u);
  ASSERT_EQ(data.exclusions.size(), 3u);
  EXPECT_EQ(data.exclusions[0].audio_path, "broken.wav");
  EXPECT_NE(data.exclusions[2].reason.find("8000"), std::string::npos);
  for (const PreparedSample& s : data.samples) {
    EXPECT_FALSE(s.chunks.empty());
    EXPECT_EQ(s.chunks[0].cols(), 20);
    EXPECT_EQ(s.label, manifest_->entries[s.manifest_index].label);
  }
}

TEST_F(PrepareTest, CacheAndJobsGiveIdenticalFeatures) {
  AuditConfig c;
  c.regions = RegionKind::kSpeech;
  const PreparedDataset plain = PrepareDataset(*manifest_, c);
  c.cache_dir = dir_->file("cache");
  c.jobs = 3;
  const PreparedDataset first = PrepareDataset(*manifest_, c);
  const auto cached_files = std::distance(
      std::filesystem::directory_iterator(c.cache_dir),
      std::filesystem::directory_iterator());
  EXPECT_EQ(cached_files, 6);
  const PreparedDataset second = PrepareDataset(*manifest_, c);
  ASSERT_EQ(plain.samples.size(), second.samples.size());
  for (size_t i = 0; i < plain.samples.size(); ++i) {
    ASSERT_EQ(plain.samples[i].chunks.size(), second.samples[i].chunks.size());
    for (size_t k = 0; k < plain.samples[i].chunks.size(); ++k) {
      EXPECT_EQ(plain.samples[i].chunks[k], first.samples[i].chunks[k]);
      EXPECT_EQ(plain.samples[i].chunks[k], second.samples[i].chunks[k]);
    }
  }
}

TEST_F(PrepareTest, ManualWithoutAnnotationFails) {
  DatasetManifest m = *manifest_;
  m.entries.resize(6);
  m.entries[2].annotation_path.reset();
  AuditConfig c;
  c.segmentation = SegmentationSource::kManual;
  EXPECT_EQ(KindOf([&] { PrepareDataset(m, c); }),
            ErrorKind::kMissingAnnotation);
  c.segmentation = SegmentationSource::kVad;
  c.feature = FeatureOrigin::kExternal;
  EXPECT_EQ(KindOf([&] { PrepareDataset(m, c); }),
            ErrorKind::kMalformedManifest);
}

TEST_F(PrepareTest, ParticipantRegionsFromAnnotations) {
  DatasetManifest m = *manifest_;
  m.entries.resize(6);
  AuditConfig c;
  c.segmentation = SegmentationSource::kManual;
  c.regions = RegionKind::kParticipant;
  const PreparedDataset data = PrepareDataset(m, c);
  EXPECT_EQ(data.samples.size(), 6u);
}

TEST_F(PrepareTest, ProbeCoversManifest) {
  const ProbeResult r = ProbeManifest(*manifest_, ParseProbeBand("3000:3500"), 2);
  EXPECT_EQ(r.per_recording.size(), 8u);
  EXPECT_EQ(r.errors.size(), 1u);
  EXPECT_TRUE(r.errors.count("broken.wav"));
  const ProbeResult high = ProbeManifest(*manifest_, ParseProbeBand("6000:7500"));
  EXPECT_TRUE(high.errors.count("narrow.wav"));  // Nyquist 4 kHz
  for (const auto& [path, db] : r.per_recording) {
    EXPECT_LE(db, 0.0) << path;
  }
}

}  // namespace
}  // namespace leakaudit
