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

#include "leakaudit/interchange.h"

#include <cstring>
#include <fstream>
#include <iterator>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }

  float GetFloat() {
    const uint32_t raw = Get<uint32_t>();
    float f;
    std::memcpy(&f, &raw, sizeof(f));
    return f;
  }

  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorKind::kFormatMismatch, "embedding file truncated");
    }
  }

  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

template <typename T>
void Put(std::vector<uint8_t>& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

}  // namespace

EmbeddingFile ParseEmbeddingFile(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LEAK", 4) != 0) {
    throw Error(ErrorKind::kFormatMismatch, "missing LEAK magic");
  }
  Reader reader(bytes.subspan(4));
  EmbeddingFile file;
  const auto version = reader.Get<uint16_t>();
  if (version != EmbeddingFile::kVersion) {
    throw Error(ErrorKind::kFormatMismatch,
                "unsupported version " + std::to_string(version));
  }
  file.dim = reader.Get<uint32_t>();
  file.hop_us = reader.Get<uint32_t>();
  file.region_fingerprint = reader.Get<uint64_t>();
  const auto blocks = reader.Get<uint32_t>();
  if (file.dim == 0 || file.hop_us == 0) {
    throw Error(ErrorKind::kFormatMismatch, "dim and hop must be positive");
  }
  for (uint32_t b = 0; b < blocks; ++b) {
    EmbeddingBlock block;
    block.region_index = reader.Get<uint32_t>();
    block.frame_count = reader.Get<uint32_t>();
    const uint64_t count = uint64_t{block.frame_count} * file.dim;
    if (count > reader.remaining() / 4) {
      throw Error(ErrorKind::kFormatMismatch, "embedding file truncated");
    }
    block.values.resize(count);
    for (float& v : block.values) v = reader.GetFloat();
    file.blocks.push_back(std::move(block));
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorKind::kFormatMismatch, "trailing bytes after last block");
  }
  return file;
}

EmbeddingFile ReadEmbeddingFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return ParseEmbeddingFile(bytes);
}

std::vector<uint8_t> EncodeEmbeddingFile(const EmbeddingFile& file) {
  std::vector<uint8_t> out = {'L', 'E', 'A', 'K'};
  Put<uint16_t>(out, EmbeddingFile::kVersion);
  Put<uint32_t>(out, file.dim);
  Put<uint32_t>(out, file.hop_us);
  Put<uint64_t>(out, file.region_fingerprint);
  Put<uint32_t>(out, static_cast<uint32_t>(file.blocks.size()));
  for (const EmbeddingBlock& block : file.blocks) {
    if (block.values.size() != uint64_t{block.frame_count} * file.dim) {
      throw Error(ErrorKind::kFormatMismatch,
                  "block size disagrees with frame_count * dim");
    }
    Put<uint32_t>(out, block.region_index);
    Put<uint32_t>(out, block.frame_count);
    for (float f : block.values) {
      uint32_t raw;
      std::memcpy(&raw, &f, sizeof(raw));
      Put<uint32_t>(out, raw);
    }
  }
  return out;
}

void WriteEmbeddingFile(const std::string& path, const EmbeddingFile& file) {
  const std::vector<uint8_t> bytes = EncodeEmbeddingFile(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

}  // namespace leakaudit
