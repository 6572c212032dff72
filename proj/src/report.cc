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

#include "leakaudit/report.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "leakaudit/error.h"

namespace leakaudit {
namespace {

using nlohmann::json;

json BoxJson(const BoxStats& b) {
  return {{"min", b.min},       {"q1", b.q1},   {"median", b.median},
          {"q3", b.q3},         {"max", b.max}, {"mean", b.mean}};
}

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

}  // namespace

std::string ReportStem(const AuditConfig& config) {
  return "audit_" + config.Signature() + "_k" +
         std::to_string(config.k_folds) + "_s" +
         std::to_string(config.n_seeds);
}

std::string ReportJson(const AuditReport& r) {
  const AuditConfig& c = r.config;
  json config = {
      {"feature", FeatureOriginName(c.feature)},
      {"enhancement", EnhancementName(c.enhancement)},
      {"regions", RegionKindName(c.regions)},
      {"segmentation", SegmentationSourceName(c.segmentation)},
      {"k_folds", c.k_folds},
      {"n_seeds", c.n_seeds},
      {"seed_base", c.seed_base},
      {"n_permutations", c.n_permutations},
      {"permutation_seed", c.permutation_seed},
      {"epochs", c.train.epochs},
      {"batch_size", c.train.batch_size},
      {"learning_rate", c.train.learning_rate},
      {"weight_decay", c.train.weight_decay},
      {"vad_threshold", c.vad_threshold},
      {"resample_rate", c.resample_rate},
      {"intermediate_rate", c.intermediate_rate},
      {"min_original_rate", c.min_original_rate},
      {"probe_band", {c.probe_band.low_hz, c.probe_band.high_hz}},
  };
  json exclusions = json::array();
  for (const Exclusion& e : r.exclusions) {
    exclusions.push_back({{"audio_path", e.audio_path}, {"reason", e.reason}});
  }
  json j = {
      {"provenance",
       {{"tool", "leakaudit"},
        {"version", kVersion},
        {"manifest_hash", Hex(r.manifest_hash)},
        {"config", config}}},
      {"samples",
       {{"used", r.n_samples},
        {"per_class", {r.n_per_class[0], r.n_per_class[1]}},
        {"excluded", exclusions},
        {"dropped_spans", r.dropped_spans}}},
      {"seeds", r.seeds},
      {"per_seed_auc", r.per_seed_auc},
      {"box_stats", BoxJson(r.box)},
      {"permutation",
       {{"n", r.permutation.aucs.size()},
        {"p_value", r.permutation.p_value},
        {"aucs", r.permutation.aucs}}},
      {"probe",
       {{"band_hz", {r.probe.band.low_hz, r.probe.band.high_hz}},
        {"mean_band_power_db", r.probe.band_power_db},
        {"per_recording", r.probe.per_recording},
        {"errors", r.probe.errors}}},
      {"verdict", VerdictName(r.verdict)},
  };
  return j.dump(2) + "\n";
}

std::string ReportMarkdown(const AuditReport& r) {
  const AuditConfig& c = r.config;
  std::ostringstream md;
  md << "# Leakage audit: " << c.Signature() << "\n\n";
  md << "Verdict: **" << VerdictName(r.verdict) << "**\n\n";
  md << "| setting | value |\n|---|---|\n";
  md << "| feature | " << FeatureOriginName(c.feature) << " |\n";
  md << "| enhancement | " << EnhancementName(c.enhancement) << " |\n";
  md << "| regions | " << RegionKindName(c.regions) << " |\n";
  md << "| segmentation | " << SegmentationSourceName(c.segmentation)
     << " |\n";
  md << "| folds x seeds | " << c.k_folds << " x " << c.n_seeds << " |\n";
  md << "| samples used | " << r.n_samples << " (" << r.n_per_class[0] << " / "
     << r.n_per_class[1] << ") |\n";
  md << "| excluded | " << r.exclusions.size() << " |\n";
  md << "| manifest hash | " << Hex(r.manifest_hash) << " |\n\n";
  md << "## AUC across seeds\n\n";
  md << "| min | q1 | median | q3 | max | mean |\n|---|---|---|---|---|---|\n";
  md << "| " << Fixed(r.box.min) << " | " << Fixed(r.box.q1) << " | "
     << Fixed(r.box.median) << " | " << Fixed(r.box.q3) << " | "
     << Fixed(r.box.max) << " | " << Fixed(r.box.mean) << " |\n\n";
  md << "Per-seed AUC (box-plot data):\n\n```\n";
  for (size_t i = 0; i < r.per_seed_auc.size(); ++i) {
    md << (i ? " " : "") << Fixed(r.per_seed_auc[i], 4);
  }
  md << "\n```\n\n";
  md << "Permutation test: p = " << Fixed(r.permutation.p_value, 4) << " over "
     << r.permutation.aucs.size() << " label permutations.\n\n";
  md << "## Noise-floor probe\n\n";
  md << "Band " << r.probe.band.low_hz << "-" << r.probe.band.high_hz
     << " Hz, mean " << Fixed(r.probe.band_power_db, 2) << " dB";
  if (!r.probe.errors.empty()) {
    md << ", " << r.probe.errors.size() << " recordings not measurable";
  }
  md << ".\n";
  if (!r.exclusions.empty()) {
    md << "\n## Excluded recordings\n\n";
    for (const Exclusion& e : r.exclusions) {
      md << "- `" << e.audio_path << "`: " << e.reason << "\n";
    }
  }
  return md.str();
}

std::string WriteReport(const AuditReport& report, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + out_dir);
  const std::filesystem::path stem =
      std::filesystem::path(out_dir) / ReportStem(report.config);
  const std::string json_path = stem.string() + ".json";
  WriteText(json_path, ReportJson(report));
  WriteText(stem.string() + ".md", ReportMarkdown(report));
  return json_path;
}

}  // namespace leakaudit
