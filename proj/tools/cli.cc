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

#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leakaudit/audio.h"
#include "leakaudit/audit.h"
#include "leakaudit/csv.h"
#include "leakaudit/enhance.h"
#include "leakaudit/error.h"
#include "leakaudit/features.h"
#include "leakaudit/log.h"
#include "leakaudit/manifest.h"
#include "leakaudit/report.h"
#include "leakaudit/segment.h"
#include "leakaudit/synthgen.h"

namespace leakaudit {
namespace {

struct AuditFlags {
  std::string manifest;
  std::string feature = "mfcc";
  std::string enhancement = "orig";
  std::string regions = "non_speech";
  std::string segmentation = "vad";
  int folds = 8;
  int seeds = 50;
  uint64_t seed_base = 0;
  int permutations = 200;
  uint64_t perm_seed = 1;
  int epochs = 40;
  int batch_size = 16;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double vad_threshold = 0.5;
  int resample_rate = 16000;
  int intermediate_rate = 0;
  int min_original_rate = 0;
  std::string probe_band = "14000:16000";
  int jobs = DefaultJobs();
  std::string out_dir = ".";
  std::string cache_dir;
};

struct ProbeFlags {
  std::string manifest;
  std::string band = "14000:16000";
  std::string out;
  int jobs = DefaultJobs();
};

struct SynthFlags {
  std::string out_dir;
  int n_per_class = 20;
  double duration = 60.0;
  double speech_duty = 0.75;
  std::string confound = "none";
  double strength = 1.0;
  uint64_t seed = 0;
  int rate = 16000;
  double syllable_rate = 4.5;
  double syllable_rate_ad = 0.0;
};

struct SegmentFlags {
  std::string input;
  bool vad = false;
  std::string annotation;
  std::string mode = "speech";
  double threshold = 0.5;
  int rate = 16000;
  std::string out;
};

struct EnhanceFlags {
  std::string input;
  std::string mode = "ln_nr";
  int rate = 0;
  std::string out;
};

struct FeatureFlags {
  std::string input;
  bool mfcc = false;
  std::string embeddings;
  std::string regions;
  std::string region_kind = "speech";
  int rate = 16000;
  std::string out;
};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  if (items.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "empty list '" + text + "'");
  }
  return items;
}

// Writes to `path`, or to `out` when the path is empty or "-".
void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

int CmdAudit(const AuditFlags& f, std::ostream& out) {
  AuditConfig base;
  base.segmentation = ParseSegmentationSource(f.segmentation);
  base.k_folds = f.folds;
  base.n_seeds = f.seeds;
  base.seed_base = f.seed_base;
  base.n_permutations = f.permutations;
  base.permutation_seed = f.perm_seed;
  base.train.epochs = f.epochs;
  base.train.batch_size = f.batch_size;
  base.train.learning_rate = f.lr;
  base.train.weight_decay = f.weight_decay;
  base.vad_threshold = f.vad_threshold;
  base.resample_rate = f.resample_rate;
  base.intermediate_rate = f.intermediate_rate;
  base.min_original_rate = f.min_original_rate;
  base.probe_band = ParseProbeBand(f.probe_band);
  base.jobs = f.jobs;
  base.cache_dir = f.cache_dir;

  std::vector<AuditConfig> configs;
  for (const std::string& feat : SplitList(f.feature)) {
    for (const std::string& enh : SplitList(f.enhancement)) {
      for (const std::string& reg : SplitList(f.regions)) {
        AuditConfig c = base;
        c.feature = ParseFeatureOrigin(feat);
        c.enhancement = ParseEnhancement(enh);
        c.regions = ParseRegionKind(reg);
        c.Validate();
        configs.push_back(c);
      }
    }
  }

  const DatasetManifest manifest = LoadManifest(f.manifest);
  const ProbeResult probe = ProbeManifest(manifest, base.probe_band, f.jobs);
  const uint64_t hash = ManifestHash(manifest);
  for (const AuditConfig& c : configs) {
    LEAKAUDIT_LOG(kInfo) << "audit " << c.Signature();
    const PreparedDataset data = PrepareDataset(manifest, c);
    const AuditReport report = RunAuditPrepared(data, probe, hash, c);
    const std::string path = WriteReport(report, f.out_dir);
    out << path << "\t" << VerdictName(report.verdict) << "\tmedian_auc="
        << report.box.median << "\tp=" << report.permutation.p_value << "\n";
  }
  return kExitOk;
}

int CmdProbe(const ProbeFlags& f, std::ostream& out) {
  const ProbeBand band = ParseProbeBand(f.band);
  if (f.jobs < 1) throw Error(ErrorKind::kInvalidConfig, "jobs must be >= 1");
  const DatasetManifest manifest = LoadManifest(f.manifest);
  const ProbeResult result = ProbeManifest(manifest, band, f.jobs);
  std::string table =
      csv::FormatRow({"audio_path", "label", "band_power_db", "error"}) + "\n";
  for (const ManifestEntry& e : manifest.entries) {
    std::string power, error;
    if (auto it = result.per_recording.find(e.audio_path);
        it != result.per_recording.end()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", it->second);
      power = buf;
    } else {
      error = result.errors.at(e.audio_path);
    }
    table += csv::FormatRow({e.audio_path, std::to_string(e.label), power,
                             error}) +
             "\n";
  }
  Emit(f.out, table, out);
  return result.errors.empty() ? kExitOk : kExitDataError;
}

int CmdSynth(const SynthFlags& f, std::ostream& out) {
  SynthSpec spec;
  spec.n_per_class = f.n_per_class;
  spec.duration_s = f.duration;
  spec.speech_duty = f.speech_duty;
  spec.confound = ParseConfound(f.confound);
  spec.confound_strength = f.strength;
  spec.seed = f.seed;
  spec.rate = f.rate;
  spec.syllable_rate_hz = {f.syllable_rate,
                           f.syllable_rate_ad > 0 ? f.syllable_rate_ad
                                                  : f.syllable_rate};
  spec.Validate();
  const DatasetManifest m = SynthDataset(spec, f.out_dir);
  out << (std::filesystem::path(f.out_dir) / "manifest.csv").string() << "\t"
      << m.entries.size() << " recordings\n";
  return kExitOk;
}

int CmdSegment(const SegmentFlags& f, std::ostream& out) {
  SegmentationConfig config;
  config.mode = ParseRegionKind(f.mode);
  config.vad_threshold = f.threshold;
  config.source = f.annotation.empty() ? SegmentationSource::kVad
                                       : SegmentationSource::kManual;
  if (f.vad && !f.annotation.empty()) {
    throw Error(ErrorKind::kInvalidConfig,
                "--vad and --annotation are exclusive");
  }
  if (!(f.threshold > 0 && f.threshold < 1)) {
    throw Error(ErrorKind::kInvalidConfig, "threshold must lie in (0, 1)");
  }
  if (config.mode == RegionKind::kParticipant &&
      config.source == SegmentationSource::kVad) {
    throw Error(ErrorKind::kMissingSpeakerLabels,
                "participant regions need --annotation");
  }
  const AudioSample audio = Resample(DecodeWav(f.input), f.rate);
  Annotation annotation;
  if (!f.annotation.empty()) annotation = LoadAnnotation(f.annotation);
  const RegionSet regions = SelectRegions(
      audio, config, f.annotation.empty() ? nullptr : &annotation);
  Emit(f.out, FormatRegionCsv(regions), out);
  return kExitOk;
}

int CmdEnhance(const EnhanceFlags& f, std::ostream& out) {
  const Enhancement mode = ParseEnhancement(f.mode);
  if (f.rate < 0) throw Error(ErrorKind::kInvalidConfig, "rate must be >= 0");
  AudioSample audio = DecodeWav(f.input);
  if (f.rate > 0) audio = Resample(audio, f.rate);
  const AudioSample enhanced = Enhance(audio, mode);
  std::string path = f.out;
  if (path.empty()) {
    const std::filesystem::path in(f.input);
    path = (in.parent_path() /
            (in.stem().string() + "_" + f.mode + ".wav"))
               .string();
  }
  WriteWav(path, enhanced.samples, enhanced.rate, WavEncoding::kFloat32);
  out << path << "\n";
  return kExitOk;
}

int CmdFeatures(const FeatureFlags& f, std::ostream& out) {
  if (f.mfcc && !f.embeddings.empty()) {
    throw Error(ErrorKind::kInvalidConfig,
                "--mfcc and --embeddings are exclusive");
  }
  const RegionKind kind = ParseRegionKind(f.region_kind);
  const AudioSample audio = Resample(DecodeWav(f.input), f.rate);
  const RegionSet regions =
      f.regions.empty()
          ? RegionSet(kind, audio.duration_s(), {{0.0, audio.duration_s()}})
          : LoadRegionCsv(f.regions, kind, audio.duration_s());
  FeatureSequence features;
  if (f.embeddings.empty()) {
    MfccOptions options;
    options.rate = audio.rate;
    features = ExtractOverRegions(audio, regions, MfccExtractor(options));
  } else {
    features = ZNormalize(LoadEmbeddings(f.embeddings, regions));
  }
  std::string text = "# hop_s=" + std::to_string(features.hop_s) +
                     " frames=" + std::to_string(features.n_frames()) +
                     " fingerprint=" + FingerprintHex(regions.Fingerprint()) +
                     "\n";
  std::vector<std::string> row;
  for (Eigen::Index d = 0; d < features.dim(); ++d) {
    row.push_back("c" + std::to_string(d));
  }
  text += csv::FormatRow(row) + "\n";
  char buf[32];
  for (Eigen::Index t = 0; t < features.n_frames(); ++t) {
    row.clear();
    for (Eigen::Index d = 0; d < features.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.9g", features.frames(t, d));
      row.push_back(buf);
    }
    text += csv::FormatRow(row) + "\n";
  }
  Emit(f.out, text, out);
  return kExitOk;
}

// Overlays key=value lines onto the options of `cmd` that were not given on
// the command line. Keys are long flag names without the leading dashes.
void ApplyConfigFile(CLI::App& cmd, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw Error(ErrorKind::kInvalidConfig, "config " + path + ": " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() || item.name == "config") {
      throw Error(ErrorKind::kInvalidConfig,
                  "unsupported key '" + item.fullname() + "' in " + path);
    }
    CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr) {
      throw Error(ErrorKind::kInvalidConfig,
                  "unknown key '" + item.name + "' in " + path);
    }
    if (opt->count() > 0) continue;
    std::string value;
    for (const std::string& part : item.inputs) {
      value += (value.empty() ? "" : ",") + part;
    }
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorKind::kInvalidConfig,
                  item.name + " in " + path + ": " + e.what());
    }
  }
}

void RequireSet(const CLI::App& cmd, const std::string& flag) {
  if (cmd && cmd.get_option(flag)->count() == 0) {
    throw Error(ErrorKind::kInvalidConfig, flag + " is required");
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Acoustic leakage auditor for speech classification corpora",
               "leakaudit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity,
               "More logging on stderr (-v info, -vv debug)");

  AuditFlags af;
  CLI::App* audit =
      app.add_subcommand("audit", "Cross-validated leakage audit of a manifest");
  audit->add_option("--manifest", af.manifest, "Dataset manifest CSV (required)")
      ->check(CLI::ExistingFile);
  audit->add_option("--feature", af.feature, "mfcc|external, comma list");
  audit->add_option("--enhancement", af.enhancement,
                    "orig|nr|ln_nr|ln, comma list");
  audit->add_option("--regions", af.regions,
                    "speech|non_speech|participant, comma list");
  audit->add_option("--segmentation", af.segmentation, "vad|manual");
  audit->add_option("--folds", af.folds, "Cross-validation folds");
  audit->add_option("--seeds", af.seeds, "Training seeds per configuration");
  audit->add_option("--seed-base", af.seed_base, "First seed");
  audit->add_option("--permutations", af.permutations,
                    "Label permutations for the p-value");
  audit->add_option("--perm-seed", af.perm_seed, "Permutation seed");
  audit->add_option("--epochs", af.epochs, "Training epochs");
  audit->add_option("--batch-size", af.batch_size, "Chunks per batch");
  audit->add_option("--lr", af.lr, "Adam learning rate");
  audit->add_option("--weight-decay", af.weight_decay,
                    "Decoupled weight decay");
  audit->add_option("--vad-threshold", af.vad_threshold,
                    "Speech probability threshold");
  audit->add_option("--resample-rate", af.resample_rate,
                    "Analysis sample rate (Hz)");
  audit->add_option("--intermediate-rate", af.intermediate_rate,
                    "Bandwidth-homogenizing rate (Hz), 0 = off");
  audit->add_option("--min-original-rate", af.min_original_rate,
                    "Exclude files recorded below this rate (Hz)");
  audit->add_option("--probe-band", af.probe_band,
                    "Noise-floor probe band low:high (Hz)");
  audit->add_option("--jobs", af.jobs, "Parallel trials");
  audit->add_option("--out-dir", af.out_dir, "Report directory");
  audit->add_option("--cache-dir", af.cache_dir,
                    "Feature cache directory, empty = off");

  ProbeFlags pf;
  CLI::App* probe = app.add_subcommand(
      "probe", "Per-recording high-band power table at the file rate");
  probe->add_option("--manifest", pf.manifest, "Dataset manifest CSV (required)")
      ->check(CLI::ExistingFile);
  probe->add_option("--band", pf.band, "Band low:high (Hz)");
  probe->add_option("--out", pf.out, "Output CSV, default stdout");
  probe->add_option("--jobs", pf.jobs, "Parallel decodes");

  SynthFlags sf;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic confounded corpus");
  synth->add_option("--out-dir", sf.out_dir, "Corpus directory (required)");
  synth->add_option("--n-per-class", sf.n_per_class, "Recordings per class");
  synth->add_option("--duration", sf.duration, "Recording length (s)");
  synth->add_option("--speech-duty", sf.speech_duty,
                    "Approximate fraction of time with speech");
  synth->add_option(
      "--confound", sf.confound,
      "none | noise_floor:DB | bandwidth:HZ0:HZ1 | loudness:LU");
  synth->add_option("--strength", sf.strength,
                    "Fraction of recordings whose confound follows the class");
  synth->add_option("--seed", sf.seed, "Generator seed");
  synth->add_option("--rate", sf.rate, "Sample rate (Hz)");
  synth->add_option("--syllable-rate", sf.syllable_rate,
                    "Syllable rate of the speech surrogate (Hz)");
  synth->add_option("--syllable-rate-ad", sf.syllable_rate_ad,
                    "Class-1 syllable rate (Hz), 0 = same as class 0");

  SegmentFlags gf;
  CLI::App* segment =
      app.add_subcommand("segment", "Write the regions of one recording");
  segment->add_option("input", gf.input, "WAV file")
      ->required()
      ->check(CLI::ExistingFile);
  segment->add_flag("--vad", gf.vad, "Energy VAD segmentation (default)");
  segment->add_option("--annotation", gf.annotation,
                      "Annotation CSV for manual segmentation")
      ->check(CLI::ExistingFile);
  segment->add_option("--mode", gf.mode, "speech|non_speech|participant");
  segment->add_option("--threshold", gf.threshold, "VAD threshold");
  segment->add_option("--rate", gf.rate, "Analysis sample rate (Hz)");
  segment->add_option("--out", gf.out, "Region CSV, default stdout");

  EnhanceFlags ef;
  CLI::App* enhance =
      app.add_subcommand("enhance", "Write an enhanced copy of one recording");
  enhance->add_option("input", ef.input, "WAV file")
      ->required()
      ->check(CLI::ExistingFile);
  enhance->add_option("--mode", ef.mode, "orig|nr|ln_nr|ln");
  enhance->add_option("--rate", ef.rate, "Resample first (Hz), 0 = keep");
  enhance->add_option("--out", ef.out,
                      "Output WAV, default <input>_<mode>.wav");

  FeatureFlags ff;
  CLI::App* features =
      app.add_subcommand("features", "Dump normalized region features as CSV");
  features->add_option("input", ff.input, "WAV file")
      ->required()
      ->check(CLI::ExistingFile);
  features->add_flag("--mfcc", ff.mfcc, "MFCC features (default)");
  features->add_option("--embeddings", ff.embeddings,
                       "LEAK interchange file instead of MFCC")
      ->check(CLI::ExistingFile);
  features->add_option("--regions", ff.regions,
                       "Region CSV, default whole file")
      ->check(CLI::ExistingFile);
  features->add_option("--region-kind", ff.region_kind,
                       "Kind assumed when the region CSV has no header");
  features->add_option("--rate", ff.rate, "Analysis sample rate (Hz)");
  features->add_option("--out", ff.out, "Output CSV, default stdout");

  std::string config_path;
  for (CLI::App* cmd : app.get_subcommands({})) {
    cmd->add_option("--config", config_path,
                    "key=value file; command-line flags take precedence");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  SetLogLevel(verbosity >= 2   ? LogLevel::kDebug
              : verbosity == 1 ? LogLevel::kInfo
                               : LogLevel::kWarning);

  try {
    CLI::App* cmd = app.get_subcommands().at(0);
    if (!config_path.empty()) ApplyConfigFile(*cmd, config_path);
    RequireSet(*audit, "--manifest");
    RequireSet(*probe, "--manifest");
    RequireSet(*synth, "--out-dir");
    if (*audit) return CmdAudit(af, out);
    if (*probe) return CmdProbe(pf, out);
    if (*synth) return CmdSynth(sf, out);
    if (*segment) return CmdSegment(gf, out);
    if (*enhance) return CmdEnhance(ef, out);
    if (*features) return CmdFeatures(ff, out);
  } catch (const Error& e) {
    err << "leakaudit: " << e.what() << "\n";
    return IsConfigError(e.kind()) ? kExitConfigError : kExitDataError;
  } catch (const std::exception& e) {
    err << "leakaudit: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace leakaudit
