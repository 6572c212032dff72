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

#ifndef LEAKAUDIT_MANIFEST_H_
#define LEAKAUDIT_MANIFEST_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakaudit {

struct ManifestEntry {
  // As written in the manifest; see DatasetManifest::Resolve.
  std::string audio_path;
  int label = 0;
  std::string speaker_id;
  std::optional<std::string> annotation_path;
  std::optional<std::string> embedding_path;
  // Acquisition metadata (codec, bit-rate mode, original rate, ...).
  std::map<std::string, std::string> meta;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  // Names for labels 0 and 1; label 1 is the positive class.
  std::array<std::string, 2> class_names = {"control", "AD"};
  // Directory relative paths are resolved against.
  std::string base_dir;

  std::string Resolve(const std::string& path) const;
  size_t CountLabel(int label) const;
};

inline constexpr std::string_view kManifestHeader =
    "audio_path,label,speaker_id,annotation_path,embedding_path,meta_json";

// Parses and validates manifest CSV text. Throws Error with kind
// MalformedManifest, InvalidLabel, DuplicatePath or EmptyClass.
DatasetManifest ParseManifest(std::string_view text,
                              const std::string& base_dir);
DatasetManifest LoadManifest(const std::string& path);

std::string FormatManifest(const DatasetManifest& manifest);
void WriteManifest(const std::string& path, const DatasetManifest& manifest);

// FNV-1a over the canonical manifest text; used for report provenance.
uint64_t ManifestHash(const DatasetManifest& manifest);

}  // namespace leakaudit

#endif  // LEAKAUDIT_MANIFEST_H_
