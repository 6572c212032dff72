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

#include "leakaudit/manifest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "leakaudit/csv.h"
#include "leakaudit/error.h"
#include "leakaudit/rng.h"

namespace leakaudit {

namespace fs = std::filesystem;

std::string DatasetManifest::Resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

size_t DatasetManifest::CountLabel(int label) const {
  size_t n = 0;
  for (const ManifestEntry& e : entries) n += e.label == label;
  return n;
}

DatasetManifest ParseManifest(std::string_view text,
                              const std::string& base_dir) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::Parse(text);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kMalformedManifest, e.what());
  }
  if (rows.empty() || csv::FormatRow(rows[0]) != kManifestHeader) {
    throw Error(ErrorKind::kMalformedManifest,
                "expected header '" + std::string(kManifestHeader) + "'");
  }
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::set<std::string> seen;
  for (size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    if (row.size() != 6) {
      throw Error(ErrorKind::kMalformedManifest,
                  where + ": expected 6 fields, got " +
                      std::to_string(row.size()));
    }
    ManifestEntry entry;
    entry.audio_path = row[0];
    if (entry.audio_path.empty()) {
      throw Error(ErrorKind::kMalformedManifest, where + ": empty audio_path");
    }
    if (row[1] == "0") {
      entry.label = 0;
    } else if (row[1] == "1") {
      entry.label = 1;
    } else {
      throw Error(ErrorKind::kInvalidLabel,
                  where + ": label '" + row[1] + "' not in {0,1}");
    }
    entry.speaker_id = row[2];
    if (!row[3].empty()) entry.annotation_path = row[3];
    if (!row[4].empty()) entry.embedding_path = row[4];
    if (!row[5].empty()) {
      nlohmann::json meta;
      try {
        meta = nlohmann::json::parse(row[5]);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kMalformedManifest,
                    where + ": meta_json: " + e.what());
      }
      if (!meta.is_object()) {
        throw Error(ErrorKind::kMalformedManifest,
                    where + ": meta_json must be an object");
      }
      for (const auto& [key, value] : meta.items()) {
        entry.meta[key] = value.is_string() ? value.get<std::string>()
                                            : value.dump();
      }
    }
    const std::string resolved = manifest.Resolve(entry.audio_path);
    if (!seen.insert(resolved).second) {
      throw Error(ErrorKind::kDuplicatePath, where + ": " + entry.audio_path);
    }
    manifest.entries.push_back(std::move(entry));
  }
  for (int label = 0; label < 2; ++label) {
    if (manifest.CountLabel(label) == 0) {
      throw Error(ErrorKind::kEmptyClass,
                  "class " + std::to_string(label) + " has no entries");
    }
  }
  return manifest;
}

DatasetManifest LoadManifest(const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::kIoError, "manifest not found: " + path);
  }
  return ParseManifest(csv::ReadFile(path),
                       fs::path(path).parent_path().string());
}

std::string FormatManifest(const DatasetManifest& manifest) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const ManifestEntry& e : manifest.entries) {
    std::string meta;
    if (!e.meta.empty()) meta = nlohmann::json(e.meta).dump();
    out += csv::FormatRow({e.audio_path, std::to_string(e.label),
                           e.speaker_id, e.annotation_path.value_or(""),
                           e.embedding_path.value_or(""), meta});
    out += '\n';
  }
  return out;
}

void WriteManifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out << FormatManifest(manifest);
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

uint64_t ManifestHash(const DatasetManifest& manifest) {
  const std::string text = FormatManifest(manifest);
  return Fnv1a(text.data(), text.size());
}

}  // namespace leakaudit
