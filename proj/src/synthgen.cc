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

#include "leakaudit/synthgen.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "leakaudit/audio.h"
#include "leakaudit/dsp.h"
#include "leakaudit/error.h"
#include "leakaudit/rng.h"

namespace leakaudit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinPauseS = 0.35;
constexpr double kTailS = 0.5;
constexpr double kRampS = 0.01;
constexpr double kInvestigatorShare = 0.2;

double DbToAmp(double db) { return std::pow(10.0, db / 20.0); }

std::vector<double> Noise(size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (double& x : out) x = rng.Normal();
  return out;
}

void NormalizeRms(std::vector<double>& x) {
  const double ms = dsp::MeanSquare(x);
  if (ms <= 0.0) return;
  const double scale = 1.0 / std::sqrt(ms);
  for (double& v : x) v *= scale;
}

// Filtered-noise band added onto `out` with weight `w`.
void AddBand(std::span<double> out, double center, double q, double w,
             int rate, Rng& rng) {
  std::vector<double> band = Noise(out.size(), rng);
  dsp::BandPass(center, q, rate).Apply(band);
  for (size_t i = 0; i < out.size(); ++i) out[i] += w * band[i];
}

// Syllable-sized bursts: short attack and release, a plateau, then a brief
// near-silent gap before the next syllable.
std::vector<double> RenderSpeech(size_t n, int rate, double syllable_hz,
                                 Rng& rng) {
  std::vector<double> out(n, 0.0);
  const auto ramp = static_cast<size_t>(0.015 * rate);
  const auto gap = static_cast<size_t>(0.05 * rate);
  size_t pos = 0;
  while (pos < n) {
    const auto syl = static_cast<size_t>(
        std::max(1.0, std::round(rate / syllable_hz * rng.Uniform(0.75, 1.25))));
    const size_t len = std::min(syl, n - pos);
    std::span<double> s(out.data() + pos, len);
    AddBand(s, rng.Uniform(300, 900), 5.0, 1.0, rate, rng);
    AddBand(s, rng.Uniform(900, 2500), 6.0, 0.6, rate, rng);
    AddBand(s, rng.Uniform(2300, 3500), 6.0, 0.3, rate, rng);
    if (rng.Uniform() < 0.3) {
      AddBand(s, rng.Uniform(4500, 6500), 2.0, 0.4, rate, rng);
    }
    const size_t body = len > gap + 2 * ramp ? len - gap : len;
    for (size_t i = 0; i < len; ++i) {
      double env = 0.03;
      if (i < body) {
        const size_t edge = std::min(i, body - 1 - i);
        double e = 1.0;
        if (edge < ramp) {
          const double u = std::sin(kPi / 2 * (edge + 0.5) / ramp);
          e = u * u;
        }
        env = std::max(env, e);
      }
      s[i] *= env;
    }
    pos += len;
  }
  NormalizeRms(out);
  return out;
}

std::vector<double> RenderCough(size_t n, int rate, Rng& rng) {
  std::vector<double> out(n, 0.0);
  AddBand(out, 1500.0, 0.8, 1.0, rate, rng);
  for (size_t i = 0; i < n; ++i) out[i] *= std::exp(-(i / double(rate)) / 0.08);
  NormalizeRms(out);
  for (double& v : out) v *= 1.4;
  return out;
}

std::vector<double> RenderLaugh(size_t n, int rate, Rng& rng) {
  std::vector<double> out(n, 0.0);
  AddBand(out, 700.0, 4.0, 1.0, rate, rng);
  AddBand(out, 1200.0, 5.0, 0.5, rate, rng);
  const double pulse_hz = rng.Uniform(4.0, 6.0);
  for (size_t i = 0; i < n; ++i) {
    const double u = std::sin(kPi * pulse_hz * i / rate);
    out[i] *= 0.1 + 0.9 * u * u;
  }
  NormalizeRms(out);
  return out;
}

std::vector<double> RenderFilledPause(size_t n, int rate, Rng& rng) {
  std::vector<double> out(n, 0.0);
  AddBand(out, rng.Uniform(450, 600), 6.0, 1.0, rate, rng);
  AddBand(out, rng.Uniform(1300, 1700), 6.0, 0.5, rate, rng);
  NormalizeRms(out);
  return out;
}

// Slowly drifting low-frequency ambience.
std::vector<double> RenderBed(size_t n, int rate, Rng& rng) {
  std::vector<double> bed = Noise(n, rng);
  const dsp::Biquad lp = dsp::LowPass(300.0, 0.7071, rate);
  lp.Apply(bed);
  lp.Apply(bed);
  const double f1 = rng.Uniform(0.1, 0.3), f2 = rng.Uniform(0.5, 1.2);
  const double p1 = rng.Uniform(0, 2 * kPi), p2 = rng.Uniform(0, 2 * kPi);
  NormalizeRms(bed);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double db = 6.0 * (0.6 * std::sin(2 * kPi * f1 * t + p1) +
                             0.4 * std::sin(2 * kPi * f2 * t + p2));
    bed[i] *= DbToAmp(db);
  }
  NormalizeRms(bed);
  return bed;
}

std::string Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

double ParseNumber(const std::string& s, std::string_view whole) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kInvalidConfig,
              "bad confound '" + std::string(whole) + "'");
}

std::string FormatG(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

Confound ParseConfound(std::string_view text) {
  std::vector<std::string> parts;
  size_t begin = 0;
  while (true) {
    const size_t colon = text.find(':', begin);
    parts.push_back(Trim(text.substr(begin, colon - begin)));
    if (colon == std::string_view::npos) break;
    begin = colon + 1;
  }
  const std::string& kind = parts[0];
  if (kind == "none" && parts.size() == 1) return Confound::None();
  if (kind == "noise_floor" && parts.size() == 2) {
    return Confound::NoiseFloor(ParseNumber(parts[1], text));
  }
  if (kind == "loudness" && parts.size() == 2) {
    return Confound::Loudness(ParseNumber(parts[1], text));
  }
  if (kind == "bandwidth" && parts.size() == 3) {
    const Confound c = Confound::Bandwidth(ParseNumber(parts[1], text),
                                           ParseNumber(parts[2], text));
    if (c.value[0] <= 0 || c.value[1] <= 0) {
      throw Error(ErrorKind::kInvalidConfig, "bandwidth must be positive");
    }
    return c;
  }
  throw Error(ErrorKind::kInvalidConfig,
              "bad confound '" + std::string(text) +
                  "' (none | noise_floor:DB | bandwidth:HZ:HZ | loudness:LU)");
}

std::string FormatConfound(const Confound& c) {
  switch (c.kind) {
    case ConfoundKind::kNone:
      return "none";
    case ConfoundKind::kNoiseFloor:
      return "noise_floor:" + FormatG(c.value[1] - c.value[0]);
    case ConfoundKind::kBandwidth:
      return "bandwidth:" + FormatG(c.value[0]) + ":" + FormatG(c.value[1]);
    case ConfoundKind::kLoudness:
      return "loudness:" + FormatG(c.value[1] - c.value[0]);
  }
  return "none";
}

void SynthSpec::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidConfig, msg);
  };
  if (n_per_class < 1) fail("n_per_class must be >= 1");
  if (!(duration_s >= 10.0)) fail("duration must be >= 10 s");
  if (!(speech_duty > 0.0 && speech_duty < 1.0)) {
    fail("speech_duty must lie in (0, 1)");
  }
  if (!(confound_strength >= 0.0 && confound_strength <= 1.0)) {
    fail("confound_strength must lie in [0, 1]");
  }
  if (rate < 8000) fail("rate must be >= 8000");
  for (double hz : syllable_rate_hz) {
    if (!(hz > 0.5 && hz < 20.0)) fail("syllable rate must lie in (0.5, 20)");
  }
  if (confound.kind == ConfoundKind::kBandwidth) {
    for (double bw : confound.value) {
      if (!(bw > 0.0)) fail("bandwidth must be positive");
    }
  }
}

SynthRecording SynthesizeRecording(const SynthSpec& spec, int label,
                                   double confound_value, uint64_t seed) {
  spec.Validate();
  Rng rng(seed);
  const int rate = spec.rate;
  const auto n = static_cast<size_t>(std::llround(spec.duration_s * rate));

  const double speech_db = kSynthSpeechDb + rng.Uniform(-3.0, 3.0);
  const double bed_db = kSynthBedDb + rng.Uniform(-2.0, 2.0);
  double floor_db = kSynthFloorDb + rng.Uniform(-1.0, 1.0);
  if (spec.confound.kind == ConfoundKind::kNoiseFloor) {
    floor_db += confound_value;
  }

  SynthRecording rec;
  std::vector<double> speech(n, 0.0);
  std::vector<double> gate(n, 0.0);
  const double syllable_hz = spec.syllable_rate_hz[label != 0];
  const double mean_unit_s = 1.9;
  const double mean_pause_s =
      mean_unit_s * (1.0 - spec.speech_duty) / spec.speech_duty;
  double t = rng.Uniform(0.5, 1.5);
  while (true) {
    const double u = rng.Uniform();
    UnitKind kind = UnitKind::kSpeech;
    double len_s;
    if (u < 0.05) {
      kind = UnitKind::kCough;
      len_s = rng.Uniform(0.2, 0.5);
    } else if (u < 0.10) {
      kind = UnitKind::kLaugh;
      len_s = rng.Uniform(0.5, 1.2);
    } else if (u < 0.15) {
      kind = UnitKind::kFilledPause;
      len_s = rng.Uniform(0.3, 0.8);
    } else {
      len_s = rng.Uniform(0.8, 3.0);
    }
    const bool investigator =
        kind == UnitKind::kSpeech && rng.Uniform() < kInvestigatorShare;
    const double pause_s =
        std::max(kMinPauseS, mean_pause_s * rng.Uniform(0.5, 1.5));
    const auto i0 = static_cast<size_t>(std::llround(t * rate));
    const size_t len = static_cast<size_t>(std::llround(len_s * rate));
    if (i0 + len + static_cast<size_t>(kTailS * rate) > n) break;

    std::vector<double> unit;
    switch (kind) {
      case UnitKind::kSpeech:
        unit = RenderSpeech(len, rate, syllable_hz, rng);
        break;
      case UnitKind::kCough:
        unit = RenderCough(len, rate, rng);
        break;
      case UnitKind::kLaugh:
        unit = RenderLaugh(len, rate, rng);
        break;
      case UnitKind::kFilledPause:
        unit = RenderFilledPause(len, rate, rng);
        break;
    }
    const double amp = DbToAmp(speech_db + rng.Uniform(-2.0, 2.0));
    const size_t ramp = std::min(static_cast<size_t>(kRampS * rate), len / 4);
    for (size_t i = 0; i < len; ++i) {
      double g = 1.0;
      const size_t edge = std::min(i, len - 1 - i);
      if (edge < ramp) {
        const double s = std::sin(kPi / 2 * (edge + 1.0) / (ramp + 1.0));
        g = s * s;
      }
      gate[i0 + i] = g;
      speech[i0 + i] = amp * g * unit[i];
    }
    rec.annotation.units.push_back(
        {static_cast<double>(i0) / rate, static_cast<double>(i0 + len) / rate,
         investigator ? "INV" : "PAR", kind});
    t = static_cast<double>(i0 + len) / rate + pause_s;
  }

  const std::vector<double> bed = RenderBed(n, rate, rng);
  const std::vector<double> floor_noise = Noise(n, rng);
  const double bed_amp = DbToAmp(bed_db), floor_amp = DbToAmp(floor_db);
  rec.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    rec.samples[i] = speech[i] + bed_amp * bed[i] + floor_amp * floor_noise[i];
  }

  if (spec.confound.kind == ConfoundKind::kBandwidth &&
      2.0 * confound_value < rate) {
    AudioSample s;
    s.samples = std::move(rec.samples);
    s.rate = s.original_rate = rate;
    const auto intermediate = static_cast<int>(std::lround(2.0 * confound_value));
    AudioSample limited = Homogenize(s, intermediate, rate);
    limited.samples.resize(n, 0.0);
    rec.samples = std::move(limited.samples);
  } else if (spec.confound.kind == ConfoundKind::kLoudness) {
    const double g = DbToAmp(confound_value);
    for (double& x : rec.samples) x *= g;
  }
  for (double& x : rec.samples) x = std::clamp(x, -1.0, 1.0);
  rec.gate = std::move(gate);
  return rec;
}

std::vector<ConfoundAssignment> AssignConfound(const SynthSpec& spec,
                                               int label) {
  const int n = spec.n_per_class;
  Rng rng(MixSeed(spec.seed, 0xC0FF00 + static_cast<uint64_t>(label != 0)));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.Shuffle(std::span(order));
  const auto fixed = static_cast<int>(std::lround(spec.confound_strength * n));
  std::vector<ConfoundAssignment> out(n);
  for (int k = 0; k < n; ++k) {
    ConfoundAssignment& a = out[order[k]];
    if (k < fixed) {
      a = {spec.confound.value[label != 0], true};
    } else {
      a = {spec.confound.value[rng.Below(2)], false};
    }
  }
  return out;
}

DatasetManifest SynthDataset(const SynthSpec& spec,
                             const std::string& out_dir) {
  spec.Validate();
  namespace fs = std::filesystem;
  try {
    fs::create_directories(fs::path(out_dir) / "audio");
    fs::create_directories(fs::path(out_dir) / "annotations");
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::kIoError, e.what());
  }
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (int label = 0; label < 2; ++label) {
    const std::vector<ConfoundAssignment> assign = AssignConfound(spec, label);
    for (int i = 0; i < spec.n_per_class; ++i) {
      const int index = label * spec.n_per_class + i;
      char name[32];
      std::snprintf(name, sizeof(name), "rec_%03d", index);
      const SynthRecording rec = SynthesizeRecording(
          spec, label, assign[i].value,
          MixSeed(spec.seed, static_cast<uint64_t>(index)));
      ManifestEntry e;
      e.audio_path = std::string("audio/") + name + ".wav";
      e.annotation_path = std::string("annotations/") + name + ".csv";
      e.label = label;
      e.speaker_id = std::string("spk_") + (name + 4);
      e.meta["confound"] = FormatConfound(spec.confound);
      e.meta["confound_value"] = FormatG(assign[i].value);
      e.meta["class_set"] = assign[i].class_set ? "true" : "false";
      WriteWav(manifest.Resolve(e.audio_path), rec.samples, spec.rate);
      const std::string text = FormatAnnotation(rec.annotation);
      const std::string ann_path = manifest.Resolve(*e.annotation_path);
      std::FILE* f = std::fopen(ann_path.c_str(), "wb");
      if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        if (f) std::fclose(f);
        throw Error(ErrorKind::kIoError, "cannot write " + ann_path);
      }
      std::fclose(f);
      manifest.entries.push_back(std::move(e));
    }
  }
  WriteManifest((fs::path(out_dir) / "manifest.csv").string(), manifest);
  return manifest;
}

}  // namespace leakaudit
