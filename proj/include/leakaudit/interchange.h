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

#ifndef LEAKAUDIT_INTERCHANGE_H_
#define LEAKAUDIT_INTERCHANGE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leakaudit {

// Frames for one region, row-major float32.
struct EmbeddingBlock {
  uint32_t region_index = 0;
  uint32_t frame_count = 0;
  std::vector<float> values;  // frame_count * dim
};

// Embedding interchange file, little-endian:
//   "LEAK" | version u16 | dim u32 | hop_microseconds u32 |
//   region_fingerprint u64 | block_count u32 |
//   per block: region_index u32 | frame_count u32 | f32[frame_count * dim]
struct EmbeddingFile {
  static constexpr uint16_t kVersion = 1;

  uint32_t dim = 0;
  uint32_t hop_us = 0;
  uint64_t region_fingerprint = 0;
  std::vector<EmbeddingBlock> blocks;
};

// Throws Error(kFormatMismatch) on bad magic, unknown version, truncation,
// trailing bytes, or a block whose size disagrees with dim.
EmbeddingFile ParseEmbeddingFile(std::span<const uint8_t> bytes);
EmbeddingFile ReadEmbeddingFile(const std::string& path);

std::vector<uint8_t> EncodeEmbeddingFile(const EmbeddingFile& file);
void WriteEmbeddingFile(const std::string& path, const EmbeddingFile& file);

}  // namespace leakaudit

#endif  // LEAKAUDIT_INTERCHANGE_H_
