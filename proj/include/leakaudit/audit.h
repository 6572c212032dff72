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

#ifndef LEAKAUDIT_AUDIT_H_
#define LEAKAUDIT_AUDIT_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "leakaudit/classifier.h"
#include "leakaudit/enhance.h"
#include "leakaudit/features.h"
#include "leakaudit/manifest.h"
#include "leakaudit/segment.h"

namespace leakaudit {

// Runs fn(0) .. fn(n - 1) on up to `jobs` threads. Each index runs exactly
// once; the first exception is rethrown after all workers stop.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn);

// Number of hardware threads, at least 1.
int DefaultJobs();

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

// Quartiles by linear interpolation between order statistics (position
// p * (n - 1)). Throws Error(kEmpty).
BoxStats ComputeBoxStats(std::span<const double> values);

// Mann-Whitney concordance of label-1 scores over label-0 scores, ties 0.5.
// Throws Error(kSingleClass).
double Auc(std::span<const double> scores, std::span<const int> labels);

// k disjoint test folds over indices into `labels`, each class spread
// round-robin after a seeded shuffle. Throws Error(kTooFewSamples).
std::vector<std::vector<size_t>> StratifiedFolds(std::span<const int> labels,
                                                 int k, uint64_t seed);

enum class Verdict { kLeakageDetected, kNoEvidence, kInconclusive };
std::string_view VerdictName(Verdict v);

inline constexpr double kSignificanceLevel = 0.05;
inline constexpr double kChanceMargin = 0.55;

// leakage-detected iff p < 0.05 and median > 0.55; no-evidence iff p >= 0.05
// and median < 0.55; otherwise inconclusive. With a single seed only a
// significant permutation result yields a verdict other than inconclusive.
Verdict DecideVerdict(double permutation_p, double median_auc, int n_seeds);

struct AuditConfig {
  FeatureOrigin feature = FeatureOrigin::kMfcc;
  Enhancement enhancement = Enhancement::kOrig;
  RegionKind regions = RegionKind::kNonSpeech;
  SegmentationSource segmentation = SegmentationSource::kVad;
  int k_folds = 8;
  int n_seeds = 50;
  uint64_t seed_base = 0;
  int n_permutations = 200;
  uint64_t permutation_seed = 1;
  // seed is ignored; each fold derives its own.
  TrainConfig train;
  double vad_threshold = 0.5;
  int resample_rate = 16000;
  // 0 disables homogenization.
  int intermediate_rate = 0;
  // Recordings whose file rate is below this are excluded. 0 keeps all.
  int min_original_rate = 0;
  ProbeBand probe_band;
  int jobs = 1;
  // Empty disables the feature cache.
  std::string cache_dir;

  // Throws Error(kInvalidConfig) or Error(kMissingSpeakerLabels) for
  // participant regions without manual segmentation.
  void Validate() const;
  // Feature, enhancement, regions and segmentation joined by '_'.
  std::string Signature() const;
};

struct Exclusion {
  std::string audio_path;
  std::string reason;
};

struct PreparedSample {
  size_t manifest_index = 0;
  int label = 0;
  std::vector<Eigen::MatrixXd> chunks;
};

struct PreparedDataset {
  std::vector<PreparedSample> samples;
  std::vector<Exclusion> exclusions;
  // Region spans too short for one analysis window, summed over recordings.
  size_t dropped_spans = 0;

  std::vector<int> Labels() const;
};

// Decode -> resample (-> homogenize) -> segment (un-enhanced) -> enhance ->
// features -> chunks, per manifest entry. Unusable recordings (unreadable,
// too short, empty regions, low original rate) are excluded and logged;
// configuration errors propagate.
PreparedDataset PrepareDataset(const DatasetManifest& manifest,
                               const AuditConfig& config);

// Cross-validated scores for one seed: one score per prepared sample, each
// produced by the model that did not see it. `labels` overrides the sample
// labels (permutation trials).
std::vector<double> RunTrial(const PreparedDataset& data,
                             std::span<const int> labels,
                             const AuditConfig& config, uint64_t seed);

// Pooled AUC of RunTrial for seeds seed_base .. seed_base + n_seeds - 1.
std::vector<double> SeedAucs(const PreparedDataset& data,
                             const AuditConfig& config);

struct PermutationResult {
  double p_value = 1.0;
  std::vector<double> aucs;
};

// One trial per permutation with labels shuffled within the dataset.
// p = (1 + #{auc >= observed}) / (1 + n). Throws
// Error(kInvalidPermutationCount).
PermutationResult PermutationTest(const PreparedDataset& data,
                                  const AuditConfig& config,
                                  double observed_median_auc);

// Probe of every recording at its file rate.
ProbeResult ProbeManifest(const DatasetManifest& manifest,
                          const ProbeBand& band, int jobs = 1);

struct AuditReport {
  AuditConfig config;
  std::vector<uint64_t> seeds;
  std::vector<double> per_seed_auc;
  BoxStats box;
  PermutationResult permutation;
  ProbeResult probe;
  Verdict verdict = Verdict::kInconclusive;
  size_t n_samples = 0;
  size_t n_per_class[2] = {0, 0};
  std::vector<Exclusion> exclusions;
  size_t dropped_spans = 0;
  uint64_t manifest_hash = 0;
};

AuditReport RunAudit(const DatasetManifest& manifest,
                     const AuditConfig& config);
// Same, reusing an already prepared dataset and probe.
AuditReport RunAuditPrepared(const PreparedDataset& data,
                             const ProbeResult& probe,
                             uint64_t manifest_hash,
                             const AuditConfig& config);

}  // namespace leakaudit

#endif  // LEAKAUDIT_AUDIT_H_
