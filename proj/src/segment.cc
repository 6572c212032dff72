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

#include "leakaudit/segment.h"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "leakaudit/csv.h"
#include "leakaudit/dsp.h"
#include "leakaudit/error.h"
#include "leakaudit/rng.h"

namespace leakaudit {
namespace {

constexpr double kBoundsTolerance = 1e-9;
// Manual annotations may overrun the decoded audio by rounding; more than
// this is an error.
constexpr double kAnnotationOverrun = 0.1;

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(const std::string& s, ErrorKind kind,
                   const std::string& where) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(kind, where + ": not a number: '" + s + "'");
  }
}

}  // namespace

std::string_view RegionKindName(RegionKind kind) {
  switch (kind) {
    case RegionKind::kSpeech: return "speech";
    case RegionKind::kNonSpeech: return "non_speech";
    case RegionKind::kParticipant: return "participant";
  }
  return "";
}

RegionKind ParseRegionKind(std::string_view name) {
  if (name == "speech") return RegionKind::kSpeech;
  if (name == "non_speech") return RegionKind::kNonSpeech;
  if (name == "participant") return RegionKind::kParticipant;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown region mode '" + std::string(name) + "'");
}

std::string_view SegmentationSourceName(SegmentationSource source) {
  return source == SegmentationSource::kVad ? "vad" : "manual";
}

SegmentationSource ParseSegmentationSource(std::string_view name) {
  if (name == "vad") return SegmentationSource::kVad;
  if (name == "manual") return SegmentationSource::kManual;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown segmentation source '" + std::string(name) + "'");
}

RegionSet::RegionSet(RegionKind kind, double total_duration_s,
                     std::vector<Interval> intervals)
    : kind_(kind),
      total_duration_s_(total_duration_s),
      intervals_(std::move(intervals)) {
  if (!(total_duration_s_ >= 0.0)) {
    throw Error(ErrorKind::kOutOfBounds, "negative total duration");
  }
  for (size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& iv = intervals_[i];
    if (!(iv.start_s >= 0.0 && iv.start_s < iv.end_s &&
          iv.end_s <= total_duration_s_)) {
      throw Error(ErrorKind::kOutOfBounds,
                  "interval [" + FormatDouble(iv.start_s) + ", " +
                      FormatDouble(iv.end_s) + "] outside [0, " +
                      FormatDouble(total_duration_s_) + "]");
    }
    if (i > 0 && !(intervals_[i - 1].end_s < iv.start_s)) {
      throw Error(ErrorKind::kOutOfBounds,
                  "intervals overlap or are out of order at index " +
                      std::to_string(i));
    }
  }
}

RegionSet RegionSet::Normalized(RegionKind kind, double total_duration_s,
                                std::vector<Interval> intervals) {
  for (Interval& iv : intervals) {
    iv.start_s = std::max(0.0, iv.start_s);
    iv.end_s = std::min(total_duration_s, iv.end_s);
  }
  std::erase_if(intervals,
                [](const Interval& iv) { return !(iv.start_s < iv.end_s); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.start_s < b.start_s ||
                     (a.start_s == b.start_s && a.end_s < b.end_s);
            });
  std::vector<Interval> merged;
  for (const Interval& iv : intervals) {
    if (!merged.empty() && iv.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
    } else {
      merged.push_back(iv);
    }
  }
  return RegionSet(kind, total_duration_s, std::move(merged));
}

double RegionSet::covered_s() const {
  double total = 0.0;
  for (const Interval& iv : intervals_) total += iv.length_s();
  return total;
}

uint64_t RegionSet::Fingerprint() const {
  uint64_t hash = Fnv1a(nullptr, 0);
  for (const Interval& iv : intervals_) {
    for (double v : {iv.start_s, iv.end_s}) {
      const auto ms = static_cast<uint64_t>(std::llround(v * 1000.0));
      uint8_t bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = (ms >> (8 * b)) & 0xFF;
      hash = Fnv1a(bytes, sizeof(bytes), hash);
    }
  }
  return hash;
}

std::string FingerprintHex(uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fingerprint);
  return buf;
}

std::string FormatRegionCsv(const RegionSet& regions) {
  std::ostringstream out;
  out << "# kind=" << RegionKindName(regions.kind())
      << " duration_s=" << FormatDouble(regions.total_duration_s())
      << " fingerprint=" << FingerprintHex(regions.Fingerprint()) << "\n";
  out << "start_s,end_s\n";
  for (const Interval& iv : regions.intervals()) {
    out << FormatDouble(iv.start_s) << "," << FormatDouble(iv.end_s) << "\n";
  }
  return out.str();
}

void WriteRegionCsv(const std::string& path, const RegionSet& regions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out << FormatRegionCsv(regions);
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

RegionSet ParseRegionCsv(std::string_view text, RegionKind kind,
                         double duration_s) {
  // The comment line carries kind and duration when present.
  if (text.starts_with("# ")) {
    const std::string first(text.substr(0, text.find('\n')));
    std::istringstream tokens(first.substr(2));
    std::string token;
    while (tokens >> token) {
      const size_t eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "kind") kind = ParseRegionKind(value);
      if (key == "duration_s") {
        duration_s = ParseDouble(value, ErrorKind::kFormatMismatch, "regions");
      }
    }
  }
  std::vector<csv::Row> rows;
  try {
    rows = csv::Parse(text);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kFormatMismatch, e.what());
  }
  if (rows.empty() || csv::FormatRow(rows[0]) != "start_s,end_s") {
    throw Error(ErrorKind::kFormatMismatch,
                "region file must start with 'start_s,end_s'");
  }
  std::vector<Interval> intervals;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) {
      throw Error(ErrorKind::kFormatMismatch,
                  "region row " + std::to_string(r + 1) + " needs 2 fields");
    }
    const std::string where = "region row " + std::to_string(r + 1);
    intervals.push_back(
        {ParseDouble(rows[r][0], ErrorKind::kFormatMismatch, where),
         ParseDouble(rows[r][1], ErrorKind::kFormatMismatch, where)});
  }
  return RegionSet(kind, duration_s, std::move(intervals));
}

RegionSet LoadRegionCsv(const std::string& path, RegionKind kind,
                        double duration_s) {
  return ParseRegionCsv(csv::ReadFile(path), kind, duration_s);
}

bool Annotation::HasSpeakerLabels() const {
  return std::any_of(units.begin(), units.end(),
                     [](const AnnotationUnit& u) { return !u.speaker.empty(); });
}

namespace {

UnitKind ParseUnitKind(const std::string& name, const std::string& where) {
  if (name == "speech") return UnitKind::kSpeech;
  if (name == "cough") return UnitKind::kCough;
  if (name == "laugh") return UnitKind::kLaugh;
  if (name == "filled_pause") return UnitKind::kFilledPause;
  throw Error(ErrorKind::kMalformedAnnotation,
              where + ": unknown unit kind '" + name + "'");
}

const char* UnitKindName(UnitKind kind) {
  switch (kind) {
    case UnitKind::kSpeech: return "speech";
    case UnitKind::kCough: return "cough";
    case UnitKind::kLaugh: return "laugh";
    case UnitKind::kFilledPause: return "filled_pause";
  }
  return "";
}

}  // namespace

Annotation ParseAnnotation(std::string_view text) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::Parse(text);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kMalformedAnnotation, e.what());
  }
  if (rows.empty() || csv::FormatRow(rows[0]) != "start_s,end_s,speaker,kind") {
    throw Error(ErrorKind::kMalformedAnnotation,
                "expected header 'start_s,end_s,speaker,kind'");
  }
  Annotation annotation;
  for (size_t r = 1; r < rows.size(); ++r) {
    const std::string where = "annotation row " + std::to_string(r + 1);
    if (rows[r].size() != 4) {
      throw Error(ErrorKind::kMalformedAnnotation, where + ": needs 4 fields");
    }
    AnnotationUnit unit;
    unit.start_s =
        ParseDouble(rows[r][0], ErrorKind::kMalformedAnnotation, where);
    unit.end_s = ParseDouble(rows[r][1], ErrorKind::kMalformedAnnotation, where);
    unit.speaker = rows[r][2];
    unit.kind = ParseUnitKind(rows[r][3], where);
    if (!(unit.start_s >= 0.0 && unit.start_s < unit.end_s)) {
      throw Error(ErrorKind::kMalformedAnnotation, where + ": empty unit");
    }
    if (!annotation.units.empty() &&
        unit.start_s < annotation.units.back().start_s) {
      throw Error(ErrorKind::kMalformedAnnotation,
                  where + ": unit starts must be non-decreasing");
    }
    annotation.units.push_back(std::move(unit));
  }
  return annotation;
}

Annotation LoadAnnotation(const std::string& path) {
  return ParseAnnotation(csv::ReadFile(path));
}

std::string FormatAnnotation(const Annotation& annotation) {
  std::string out = "start_s,end_s,speaker,kind\n";
  for (const AnnotationUnit& u : annotation.units) {
    out += csv::FormatRow({FormatDouble(u.start_s), FormatDouble(u.end_s),
                           u.speaker, UnitKindName(u.kind)});
    out += '\n';
  }
  return out;
}

std::vector<double> VadScores(const AudioSample& sample, double window_s) {
  const auto window = static_cast<size_t>(std::llround(window_s * sample.rate));
  if (window == 0 || sample.samples.size() < window) {
    throw Error(ErrorKind::kTooShort,
                "signal shorter than one VAD window of " +
                    FormatDouble(window_s) + " s");
  }
  const size_t count = sample.samples.size() / window;
  dsp::RealFft fft(dsp::NextPowerOfTwo(window));
  const double bin_hz = static_cast<double>(sample.rate) / fft.size();
  const double high_hz = std::min(4000.0, sample.rate / 2.0);
  const auto lo_bin = static_cast<size_t>(std::ceil(100.0 / bin_hz));
  const auto hi_bin = std::min(fft.num_bins() - 1,
                               static_cast<size_t>(std::floor(high_hz / bin_hz)));

  std::vector<double> energy_db(count);
  std::vector<dsp::Complex> bins;
  for (size_t w = 0; w < count; ++w) {
    fft.Forward(std::span(sample.samples).subspan(w * window, window), bins);
    double band = 0.0;
    for (size_t b = lo_bin; b <= hi_bin; ++b) band += std::norm(bins[b]);
    // Parseval scaling to mean power per sample.
    band *= 2.0 / (static_cast<double>(window) * fft.size());
    energy_db[w] = 10.0 * std::log10(band + 1e-12);
  }

  std::vector<double> sorted = energy_db;
  std::sort(sorted.begin(), sorted.end());
  const double pos = 0.05 * (count - 1);
  const auto lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, count - 1);
  const double noise_floor = sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  const double midpoint = noise_floor + kVadMidpointDb;

  std::vector<double> scores(count);
  for (size_t w = 0; w < count; ++w) {
    scores[w] = 1.0 / (1.0 + std::exp(-(energy_db[w] - midpoint) / kVadSlopeDb));
  }
  return scores;
}

RegionSet VadRegions(std::span<const double> scores, double threshold,
                     double window_s, double min_gap_s) {
  std::vector<Interval> runs;
  size_t i = 0;
  while (i < scores.size()) {
    if (scores[i] >= threshold) {
      size_t j = i;
      while (j < scores.size() && scores[j] >= threshold) ++j;
      runs.push_back({i * window_s, j * window_s});
      i = j;
    } else {
      ++i;
    }
  }
  RegionSet regions(RegionKind::kSpeech, scores.size() * window_s,
                    std::move(runs));
  return min_gap_s > 0.0 ? CloseGaps(regions, min_gap_s) : regions;
}

RegionSet CloseGaps(const RegionSet& regions, double min_gap_s) {
  std::vector<Interval> out;
  for (const Interval& iv : regions.intervals()) {
    if (!out.empty() && iv.start_s - out.back().end_s < min_gap_s) {
      out.back().end_s = iv.end_s;
    } else {
      out.push_back(iv);
    }
  }
  return RegionSet(regions.kind(), regions.total_duration_s(), std::move(out));
}

RegionSet Complement(const RegionSet& regions, double duration_s) {
  const RegionKind kind = regions.kind() == RegionKind::kNonSpeech
                              ? RegionKind::kSpeech
                              : RegionKind::kNonSpeech;
  std::vector<Interval> out;
  double cursor = 0.0;
  for (const Interval& iv : regions.intervals()) {
    if (iv.end_s > duration_s + kBoundsTolerance) {
      throw Error(ErrorKind::kOutOfBounds,
                  "interval ends at " + FormatDouble(iv.end_s) +
                      " past duration " + FormatDouble(duration_s));
    }
    if (iv.start_s > cursor) out.push_back({cursor, iv.start_s});
    cursor = std::max(cursor, iv.end_s);
  }
  if (cursor < duration_s) out.push_back({cursor, duration_s});
  return RegionSet(kind, duration_s, std::move(out));
}

RegionSet MergeIpus(const Annotation& annotation, double max_pause_s,
                    double total_duration_s) {
  std::vector<Interval> units;
  units.reserve(annotation.units.size());
  double last_end = 0.0;
  for (const AnnotationUnit& u : annotation.units) {
    if (!(u.start_s >= 0.0 && u.start_s < u.end_s)) {
      throw Error(ErrorKind::kMalformedAnnotation, "empty or negative unit");
    }
    units.push_back({u.start_s, u.end_s});
    last_end = std::max(last_end, u.end_s);
  }
  if (total_duration_s < 0.0) total_duration_s = last_end;
  std::sort(units.begin(), units.end(),
            [](const Interval& a, const Interval& b) {
              return a.start_s < b.start_s ||
                     (a.start_s == b.start_s && a.end_s < b.end_s);
            });
  std::vector<Interval> merged;
  for (const Interval& iv : units) {
    if (!merged.empty() &&
        iv.start_s - merged.back().end_s <= max_pause_s + kBoundsTolerance) {
      merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
    } else {
      merged.push_back(iv);
    }
  }
  for (Interval& iv : merged) iv.end_s = std::min(iv.end_s, total_duration_s);
  std::erase_if(merged,
                [](const Interval& iv) { return !(iv.start_s < iv.end_s); });
  return RegionSet(RegionKind::kSpeech, total_duration_s, std::move(merged));
}

RegionSet SelectRegions(const AudioSample& sample,
                        const SegmentationConfig& config,
                        const Annotation* annotation) {
  const double duration = sample.duration_s();
  if (config.source == SegmentationSource::kVad) {
    if (config.mode == RegionKind::kParticipant) {
      throw Error(ErrorKind::kMissingSpeakerLabels,
                  "participant regions need manual annotations");
    }
    const std::vector<double> scores = VadScores(sample, config.vad_window_s);
    const RegionSet runs = VadRegions(scores, config.vad_threshold,
                                      config.vad_window_s, config.vad_min_gap_s);
    RegionSet speech = RegionSet::Normalized(RegionKind::kSpeech, duration,
                                             runs.intervals());
    if (config.mode == RegionKind::kSpeech) return speech;
    return Complement(speech, duration);
  }

  if (annotation == nullptr) {
    throw Error(ErrorKind::kMissingAnnotation,
                "manual segmentation needs an annotation file for " +
                    sample.source_path);
  }
  for (const AnnotationUnit& u : annotation->units) {
    if (u.end_s > duration + kAnnotationOverrun) {
      throw Error(ErrorKind::kOutOfBounds,
                  "annotation unit ends at " + FormatDouble(u.end_s) +
                      " past recording end " + FormatDouble(duration));
    }
  }
  if (config.mode == RegionKind::kParticipant) {
    if (!annotation->HasSpeakerLabels()) {
      throw Error(ErrorKind::kMissingSpeakerLabels,
                  "annotation for " + sample.source_path +
                      " has no speaker labels");
    }
    Annotation own;
    for (const AnnotationUnit& u : annotation->units) {
      if (u.speaker == config.participant_label) own.units.push_back(u);
    }
    RegionSet merged = MergeIpus(own, config.max_pause_s, duration);
    return RegionSet(RegionKind::kParticipant, duration, merged.intervals());
  }
  const RegionSet speech = MergeIpus(*annotation, config.max_pause_s, duration);
  if (config.mode == RegionKind::kSpeech) return speech;
  return Complement(speech, duration);
}

}  // namespace leakaudit
