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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numeric>
#include <thread>

#include "leakaudit/audio.h"
#include "leakaudit/error.h"
#include "leakaudit/log.h"
#include "leakaudit/rng.h"

namespace leakaudit {

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min(n, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex mu;
  size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  for (size_t t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

int DefaultJobs() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

BoxStats ComputeBoxStats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kEmpty, "no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  BoxStats s;
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
  return s;
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kDimMismatch, "scores and labels differ in size");
  }
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  size_t n_pos = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Mid-rank of the tie group, 1-based.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) {
        rank_sum += rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorKind::kSingleClass, "AUC needs both classes");
  }
  const double u = rank_sum - 0.5 * static_cast<double>(n_pos) *
                                  static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<std::vector<size_t>> StratifiedFolds(std::span<const int> labels,
                                                 int k, uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kInvalidConfig, "k must be >= 2");
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i] != 0].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<size_t>(k)) {
      throw Error(ErrorKind::kTooFewSamples,
                  "class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " samples, need " +
                      std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<size_t>> folds(k);
  size_t slot = 0;
  for (int c = 0; c < 2; ++c) {
    rng.Shuffle(std::span(by_class[c]));
    for (size_t idx : by_class[c]) folds[slot++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kLeakageDetected:
      return "leakage-detected";
    case Verdict::kNoEvidence:
      return "no-evidence";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Verdict DecideVerdict(double permutation_p, double median_auc, int n_seeds) {
  const bool significant = permutation_p < kSignificanceLevel;
  if (n_seeds < 2 && !significant) return Verdict::kInconclusive;
  if (significant && median_auc > kChanceMargin) {
    return Verdict::kLeakageDetected;
  }
  if (!significant && median_auc < kChanceMargin) return Verdict::kNoEvidence;
  return Verdict::kInconclusive;
}

void AuditConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidConfig, msg);
  };
  if (k_folds < 2) fail("folds must be >= 2");
  if (n_seeds < 1) fail("seeds must be >= 1");
  if (n_permutations < 1) {
    throw Error(ErrorKind::kInvalidPermutationCount,
                "permutations must be >= 1");
  }
  if (train.epochs < 1) fail("epochs must be >= 1");
  if (train.batch_size < 1) fail("batch size must be >= 1");
  if (!(train.learning_rate > 0.0)) fail("learning rate must be > 0");
  if (!(train.weight_decay >= 0.0)) fail("weight decay must be >= 0");
  if (!(vad_threshold > 0.0 && vad_threshold < 1.0)) {
    fail("vad threshold must lie in (0, 1)");
  }
  if (resample_rate < 8000) fail("resample rate must be >= 8000");
  if (intermediate_rate < 0 || intermediate_rate > resample_rate) {
    fail("intermediate rate must lie in [0, resample rate]");
  }
  if (min_original_rate < 0) fail("min original rate must be >= 0");
  if (!(probe_band.low_hz >= 0.0 && probe_band.high_hz > probe_band.low_hz)) {
    fail("probe band must satisfy 0 <= low < high");
  }
  if (jobs < 1) fail("jobs must be >= 1");
  if (regions == RegionKind::kParticipant &&
      segmentation != SegmentationSource::kManual) {
    throw Error(ErrorKind::kMissingSpeakerLabels,
                "participant regions need manual segmentation");
  }
}

std::string AuditConfig::Signature() const {
  return std::string(FeatureOriginName(feature)) + "_" +
         std::string(EnhancementName(enhancement)) + "_" +
         std::string(RegionKindName(regions)) + "_" +
         std::string(SegmentationSourceName(segmentation));
}

std::vector<int> PreparedDataset::Labels() const {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const PreparedSample& s : samples) labels.push_back(s.label);
  return labels;
}

namespace {

bool IsExcludable(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnsupportedFormat:
    case ErrorKind::kCorruptFile:
    case ErrorKind::kIoError:
    case ErrorKind::kTooShort:
    case ErrorKind::kEmptyRegions:
    case ErrorKind::kTooFewFrames:
      return true;
    default:
      return false;
  }
}

// Feature cache: "LKFC" | rows u32 | cols u32 | hop f64 | rows*cols f64
// column-major, little-endian host assumed.
std::string CacheKey(const std::string& path, const AuditConfig& config,
                     uint64_t fingerprint) {
  std::string key = path + "|" + config.Signature() + "|" +
                    std::to_string(config.resample_rate) + "|" +
                    std::to_string(config.intermediate_rate) + "|" +
                    std::to_string(fingerprint);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a(key.data(), key.size())));
  return hex;
}

bool ReadCache(const std::string& file, FeatureSequence& out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 20 || std::memcmp(bytes.data(), "LKFC", 4) != 0) {
    return false;
  }
  uint32_t rows, cols;
  double hop;
  std::memcpy(&rows, bytes.data() + 4, 4);
  std::memcpy(&cols, bytes.data() + 8, 4);
  std::memcpy(&hop, bytes.data() + 12, 8);
  const size_t count = static_cast<size_t>(rows) * cols;
  if (bytes.size() != 20 + 8 * count) return false;
  out.frames.resize(rows, cols);
  std::memcpy(out.frames.data(), bytes.data() + 20, 8 * count);
  out.hop_s = hop;
  return true;
}

void WriteCache(const std::string& file, const FeatureSequence& f) {
  const std::string tmp =
      file + ".tmp" +
      std::to_string(std::hash<std::thread::id>()(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      LEAKAUDIT_LOG(kWarning) << "cannot write cache " << tmp;
      return;
    }
    const auto rows = static_cast<uint32_t>(f.frames.rows());
    const auto cols = static_cast<uint32_t>(f.frames.cols());
    out.write("LKFC", 4);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(&f.hop_s), 8);
    out.write(reinterpret_cast<const char*>(f.frames.data()),
              static_cast<std::streamsize>(8 * f.frames.size()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

struct Prepared {
  bool ok = false;
  PreparedSample sample;
  std::string reason;
  size_t dropped = 0;
};

Prepared PrepareOne(const DatasetManifest& manifest, size_t index,
                    const AuditConfig& config,
                    const MfccExtractor& extractor) {
  const ManifestEntry& entry = manifest.entries[index];
  const std::string path = manifest.Resolve(entry.audio_path);
  Prepared out;
  AudioSample audio = DecodeWav(path);
  if (config.min_original_rate > 0 &&
      audio.original_rate < config.min_original_rate) {
    out.reason = "original rate " + std::to_string(audio.original_rate) +
                 " Hz below " + std::to_string(config.min_original_rate);
    return out;
  }
  audio = config.intermediate_rate > 0
              ? Homogenize(audio, config.intermediate_rate,
                           config.resample_rate)
              : Resample(audio, config.resample_rate);

  SegmentationConfig seg;
  seg.mode = config.regions;
  seg.source = config.segmentation;
  seg.vad_threshold = config.vad_threshold;
  Annotation annotation;
  const bool manual = config.segmentation == SegmentationSource::kManual;
  if (manual) {
    if (!entry.annotation_path) {
      throw Error(ErrorKind::kMissingAnnotation,
                  entry.audio_path + " has no annotation_path");
    }
    annotation = LoadAnnotation(manifest.Resolve(*entry.annotation_path));
  }
  const RegionSet regions =
      SelectRegions(audio, seg, manual ? &annotation : nullptr);

  FeatureSequence features;
  std::string cache_file;
  if (!config.cache_dir.empty()) {
    cache_file = (std::filesystem::path(config.cache_dir) /
                  (CacheKey(path, config, regions.Fingerprint()) + ".lkfc"))
                     .string();
  }
  if (cache_file.empty() || !ReadCache(cache_file, features)) {
    if (config.feature == FeatureOrigin::kMfcc) {
      const AudioSample enhanced = Enhance(audio, config.enhancement);
      features = ExtractOverRegions(enhanced, regions, extractor, &out.dropped);
    } else {
      if (!entry.embedding_path) {
        throw Error(ErrorKind::kMalformedManifest,
                    entry.audio_path + " has no embedding_path");
      }
      features = ZNormalize(
          LoadEmbeddings(manifest.Resolve(*entry.embedding_path), regions));
    }
    if (!cache_file.empty()) WriteCache(cache_file, features);
  }
  out.sample.manifest_index = index;
  out.sample.label = entry.label;
  out.sample.chunks = MakeChunks(features, ChunkSpec::ForHop(features.hop_s));
  out.ok = true;
  return out;
}

}  // namespace

PreparedDataset PrepareDataset(const DatasetManifest& manifest,
                               const AuditConfig& config) {
  config.Validate();
  if (!config.cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.cache_dir, ec);
    if (ec) {
      throw Error(ErrorKind::kIoError,
                  "cannot create cache dir " + config.cache_dir);
    }
  }
  MfccOptions mfcc;
  mfcc.rate = config.resample_rate;
  const MfccExtractor extractor(mfcc);
  std::vector<Prepared> results(manifest.entries.size());
  ParallelFor(results.size(), config.jobs, [&](size_t i) {
    try {
      results[i] = PrepareOne(manifest, i, config, extractor);
    } catch (const Error& e) {
      if (!IsExcludable(e.kind())) throw;
      results[i].reason = e.what();
    }
  });
  PreparedDataset data;
  for (size_t i = 0; i < results.size(); ++i) {
    Prepared& r = results[i];
    data.dropped_spans += r.dropped;
    if (r.ok) {
      data.samples.push_back(std::move(r.sample));
    } else {
      LEAKAUDIT_LOG(kWarning) << "excluded " << manifest.entries[i].audio_path
                              << ": " << r.reason;
      data.exclusions.push_back({manifest.entries[i].audio_path, r.reason});
    }
  }
  return data;
}

std::vector<double> RunTrial(const PreparedDataset& data,
                             std::span<const int> labels,
                             const AuditConfig& config, uint64_t seed) {
  if (labels.size() != data.samples.size()) {
    throw Error(ErrorKind::kDimMismatch, "one label per prepared sample");
  }
  const auto folds = StratifiedFolds(labels, config.k_folds, seed);
  std::vector<double> scores(labels.size(), 0.0);
  std::vector<char> in_test(labels.size());
  for (size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (size_t i : folds[f]) in_test[i] = 1;
    std::vector<ChunkedSample> train;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (!in_test[i]) train.push_back({data.samples[i].chunks, labels[i]});
    }
    TrainConfig tc = config.train;
    tc.seed = MixSeed(seed, f);
    const TrainResult model = Train(train, tc);
    for (size_t i : folds[f]) {
      scores[i] = ScoreSample(model.params, data.samples[i].chunks);
    }
  }
  return scores;
}

std::vector<double> SeedAucs(const PreparedDataset& data,
                             const AuditConfig& config) {
  const std::vector<int> labels = data.Labels();
  std::vector<double> aucs(config.n_seeds);
  ParallelFor(aucs.size(), config.jobs, [&](size_t s) {
    const uint64_t seed = config.seed_base + s;
    aucs[s] = Auc(RunTrial(data, labels, config, seed), labels);
    LEAKAUDIT_LOG(kInfo) << config.Signature() << " seed " << seed
                         << " auc " << aucs[s];
  });
  return aucs;
}

PermutationResult PermutationTest(const PreparedDataset& data,
                                  const AuditConfig& config,
                                  double observed_median_auc) {
  if (config.n_permutations < 1) {
    throw Error(ErrorKind::kInvalidPermutationCount,
                "permutation count must be >= 1");
  }
  const std::vector<int> labels = data.Labels();
  PermutationResult result;
  result.aucs.resize(config.n_permutations);
  ParallelFor(result.aucs.size(), config.jobs, [&](size_t j) {
    const uint64_t seed = MixSeed(config.permutation_seed, j);
    std::vector<int> permuted = labels;
    Rng rng(seed);
    rng.Shuffle(std::span(permuted));
    result.aucs[j] = Auc(RunTrial(data, permuted, config, seed), permuted);
    LEAKAUDIT_LOG(kDebug) << "permutation " << j << " auc " << result.aucs[j];
  });
  const auto exceed = std::count_if(
      result.aucs.begin(), result.aucs.end(),
      [&](double a) { return a >= observed_median_auc; });
  result.p_value = static_cast<double>(1 + exceed) /
                   static_cast<double>(1 + config.n_permutations);
  return result;
}

ProbeResult ProbeManifest(const DatasetManifest& manifest,
                          const ProbeBand& band, int jobs) {
  const size_t n = manifest.entries.size();
  std::vector<double> power(n, 0.0);
  std::vector<std::string> error(n);
  ParallelFor(n, jobs, [&](size_t i) {
    try {
      const AudioSample a =
          DecodeWav(manifest.Resolve(manifest.entries[i].audio_path));
      power[i] = NoiseFloorProbe(a, band);
    } catch (const Error& e) {
      error[i] = e.what();
    }
  });
  ProbeResult result;
  result.band = band;
  double sum = 0.0;
  size_t measured = 0;
  for (size_t i = 0; i < n; ++i) {
    const std::string& key = manifest.entries[i].audio_path;
    if (!error[i].empty()) {
      result.errors[key] = error[i];
    } else {
      result.per_recording[key] = power[i];
      sum += power[i];
      ++measured;
    }
  }
  result.band_power_db = measured ? sum / static_cast<double>(measured) : 0.0;
  return result;
}

AuditReport RunAuditPrepared(const PreparedDataset& data,
                             const ProbeResult& probe, uint64_t manifest_hash,
                             const AuditConfig& config) {
  config.Validate();
  AuditReport report;
  report.config = config;
  report.probe = probe;
  report.manifest_hash = manifest_hash;
  report.exclusions = data.exclusions;
  report.dropped_spans = data.dropped_spans;
  report.n_samples = data.samples.size();
  for (const PreparedSample& s : data.samples) ++report.n_per_class[s.label != 0];
  for (int s = 0; s < config.n_seeds; ++s) {
    report.seeds.push_back(config.seed_base + static_cast<uint64_t>(s));
  }
  report.per_seed_auc = SeedAucs(data, config);
  report.box = ComputeBoxStats(report.per_seed_auc);
  report.permutation = PermutationTest(data, config, report.box.median);
  report.verdict = DecideVerdict(report.permutation.p_value, report.box.median,
                                 config.n_seeds);
  return report;
}

AuditReport RunAudit(const DatasetManifest& manifest,
                     const AuditConfig& config) {
  config.Validate();
  const PreparedDataset data = PrepareDataset(manifest, config);
  const ProbeResult probe =
      ProbeManifest(manifest, config.probe_band, config.jobs);
  return RunAuditPrepared(data, probe, ManifestHash(manifest), config);
}

}  // namespace leakaudit
