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

#ifndef LEAKAUDIT_SEGMENT_H_
#define LEAKAUDIT_SEGMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/audio.h"

namespace leakaudit {

enum class RegionKind { kSpeech, kNonSpeech, kParticipant };

std::string_view RegionKindName(RegionKind kind);
// Accepts "speech", "non_speech" and "participant".
RegionKind ParseRegionKind(std::string_view name);

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;

  double length_s() const { return end_s - start_s; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Ordered, disjoint time intervals over one recording. The constructor
// enforces 0 <= start < end <= total and prev.end < next.start, throwing
// Error(kOutOfBounds) otherwise.
class RegionSet {
 public:
  RegionSet() = default;
  RegionSet(RegionKind kind, double total_duration_s,
            std::vector<Interval> intervals);

  // Sorts, clips to [0, total] and merges overlapping or touching intervals.
  static RegionSet Normalized(RegionKind kind, double total_duration_s,
                              std::vector<Interval> intervals);

  RegionKind kind() const { return kind_; }
  double total_duration_s() const { return total_duration_s_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  size_t size() const { return intervals_.size(); }
  double covered_s() const;

  // Hash of the interval list rounded to whole milliseconds; stored in
  // embedding files so features computed for another segmentation are
  // rejected. FNV-1a 64 over little-endian int64 pairs
  // (round(start*1000), round(end*1000)).
  uint64_t Fingerprint() const;

 private:
  RegionKind kind_ = RegionKind::kSpeech;
  double total_duration_s_ = 0.0;
  std::vector<Interval> intervals_;
};

// Region CSV: "start_s,end_s" header, one interval per row, preceded by a
// "# kind=<kind> duration_s=<s> fingerprint=<16 hex digits>" comment.
std::string FormatRegionCsv(const RegionSet& regions);
void WriteRegionCsv(const std::string& path, const RegionSet& regions);
// `kind`/`duration_s` apply when the file lacks the comment line.
RegionSet ParseRegionCsv(std::string_view text, RegionKind kind,
                         double duration_s);
RegionSet LoadRegionCsv(const std::string& path, RegionKind kind,
                        double duration_s);

std::string FingerprintHex(uint64_t fingerprint);

enum class UnitKind { kSpeech, kCough, kLaugh, kFilledPause };

struct AnnotationUnit {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string speaker;
  UnitKind kind = UnitKind::kSpeech;
};

// Manually aligned inter-pause units. Every kind counts as speech.
struct Annotation {
  std::vector<AnnotationUnit> units;

  bool HasSpeakerLabels() const;
};

// Annotation CSV: header "start_s,end_s,speaker,kind" with kind one of
// speech, cough, laugh, filled_pause. Throws Error(kMalformedAnnotation).
Annotation ParseAnnotation(std::string_view text);
Annotation LoadAnnotation(const std::string& path);
std::string FormatAnnotation(const Annotation& annotation);

// Speech-probability scores, one per non-overlapping window; a trailing
// partial window is dropped. Each score is a logistic function of the
// window's 100-4000 Hz log energy, centred kVadMidpointDb above the
// recording's noise floor (5th percentile window energy).
inline constexpr double kVadMidpointDb = 6.0;
inline constexpr double kVadSlopeDb = 2.0;
std::vector<double> VadScores(const AudioSample& sample,
                              double window_s = 0.1);

// Maximal runs of windows with score >= threshold. Runs separated by less
// than `min_gap_s` are joined.
RegionSet VadRegions(std::span<const double> scores, double threshold = 0.5,
                     double window_s = 0.1, double min_gap_s = 0.0);

// Joins intervals separated by gaps shorter than `min_gap_s`.
RegionSet CloseGaps(const RegionSet& regions, double min_gap_s);

// Complement within [0, duration_s]. Throws Error(kOutOfBounds) when an
// interval extends past `duration_s`.
RegionSet Complement(const RegionSet& regions, double duration_s);

// Merges units whose separating pause is <= max_pause_s. `total_duration_s`
// defaults to the last unit end.
RegionSet MergeIpus(const Annotation& annotation, double max_pause_s = 0.2,
                    double total_duration_s = -1.0);

enum class SegmentationSource { kVad, kManual };

std::string_view SegmentationSourceName(SegmentationSource source);
SegmentationSource ParseSegmentationSource(std::string_view name);

struct SegmentationConfig {
  RegionKind mode = RegionKind::kNonSpeech;
  SegmentationSource source = SegmentationSource::kVad;
  double vad_window_s = 0.1;
  double vad_threshold = 0.5;
  // VAD runs closer than this are joined, mirroring the IPU pause rule.
  double vad_min_gap_s = 0.2;
  double max_pause_s = 0.2;
  std::string participant_label = "PAR";
};

// Resolves the regions a configuration asks for. `annotation` may be null
// for the VAD source. Throws MissingAnnotation / MissingSpeakerLabels.
RegionSet SelectRegions(const AudioSample& sample,
                        const SegmentationConfig& config,
                        const Annotation* annotation);

}  // namespace leakaudit

#endif  // LEAKAUDIT_SEGMENT_H_
