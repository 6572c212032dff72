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
#include <random>

#include <gtest/gtest.h>

#include "leakaudit/error.h"
#include "oracles.h"

namespace leakaudit {
namespace {

template <typename T>
void Put(std::vector<uint8_t>& b, T v) {
  uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  b.insert(b.end(), raw, raw + sizeof(T));
}

// Byte layout written field by field, independent of the encoder.
std::vector<uint8_t> HandBuilt() {
  std::vector<uint8_t> b = {'L', 'E', 'A', 'K'};
  Put<uint16_t>(b, 1);
  Put<uint32_t>(b, 3);            // dim
  Put<uint32_t>(b, 20000);        // hop in microseconds
  Put<uint64_t>(b, 0x0123456789ABCDEFull);
  Put<uint32_t>(b, 2);            // blocks
  Put<uint32_t>(b, 0);
  Put<uint32_t>(b, 1);
  for (float v : {1.0f, 2.0f, 3.0f}) Put(b, v);
  Put<uint32_t>(b, 4);
  Put<uint32_t>(b, 2);
  for (float v : {-1.0f, -2.0f, -3.0f, 0.5f, 0.25f, 0.125f}) Put(b, v);
  return b;
}

ErrorKind KindOf(std::span<const uint8_t> bytes) {
  try {
    ParseEmbeddingFile(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::kEmpty;
}

TEST(Interchange, ParsesHandBuiltLayout) {
  const auto bytes = HandBuilt();
  const EmbeddingFile f = ParseEmbeddingFile(bytes);
  EXPECT_EQ(f.dim, 3u);
  EXPECT_EQ(f.hop_us, 20000u);
  EXPECT_EQ(f.region_fingerprint, 0x0123456789ABCDEFull);
  ASSERT_EQ(f.blocks.size(), 2u);
  EXPECT_EQ(f.blocks[1].region_index, 4u);
  EXPECT_EQ(f.blocks[1].frame_count, 2u);
  EXPECT_EQ(f.blocks[1].values[4], 0.25f);
  EXPECT_EQ(EncodeEmbeddingFile(f), bytes);
}

TEST(Interchange, RandomRoundTrip) {
  std::mt19937_64 gen(1);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int t = 0; t < 20; ++t) {
    EmbeddingFile f;
    f.dim = 1 + gen() % 40;
    f.hop_us = 10000 + gen() % 20000;
    f.region_fingerprint = gen();
    const size_t n = gen() % 5;
    for (size_t b = 0; b < n; ++b) {
      EmbeddingBlock block;
      block.region_index = static_cast<uint32_t>(b * 2);
      block.frame_count = gen() % 7;
      for (size_t i = 0; i < block.frame_count * f.dim; ++i) {
        block.values.push_back(g(gen));
      }
      f.blocks.push_back(block);
    }
    const auto bytes = EncodeEmbeddingFile(f);
    const EmbeddingFile back = ParseEmbeddingFile(bytes);
    EXPECT_EQ(EncodeEmbeddingFile(back), bytes);
    ASSERT_EQ(back.blocks.size(), n);
    for (size_t b = 0; b < n; ++b) {
      EXPECT_EQ(back.blocks[b].values, f.blocks[b].values);
    }
  }
}

TEST(Interchange, Rejections) {
  auto bytes = HandBuilt();
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(KindOf(bad), ErrorKind::kFormatMismatch);
  bad = bytes;
  bad[4] = 2;  // version
  EXPECT_EQ(KindOf(bad), ErrorKind::kFormatMismatch);
  for (size_t cut : {3u, 10u, 25u, 40u}) {
    EXPECT_EQ(KindOf(std::span(bytes).first(bytes.size() - cut)),
              ErrorKind::kFormatMismatch);
  }
  bad = bytes;
  bad.push_back(0);
  EXPECT_EQ(KindOf(bad), ErrorKind::kFormatMismatch);
  bad = bytes;
  std::memset(bad.data() + 6, 0, 4);  // dim 0
  EXPECT_EQ(KindOf(bad), ErrorKind::kFormatMismatch);
  bad = bytes;
  bad[26 + 4] = 0xFF;  // huge frame count in block 0
  bad[26 + 7] = 0x7F;
  EXPECT_EQ(KindOf(bad), ErrorKind::kFormatMismatch);
}

TEST(Interchange, EncoderChecksValueCount) {
  EmbeddingFile f = ParseEmbeddingFile(HandBuilt());
  f.blocks[0].values.pop_back();
  EXPECT_THROW(EncodeEmbeddingFile(f), Error);
}

TEST(Interchange, Files) {
  oracle::TempDir dir("leak");
  const EmbeddingFile f = ParseEmbeddingFile(HandBuilt());
  WriteEmbeddingFile(dir.file("x.leak"), f);
  EXPECT_EQ(EncodeEmbeddingFile(ReadEmbeddingFile(dir.file("x.leak"))),
            HandBuilt());
  try {
    ReadEmbeddingFile(dir.file("missing.leak"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIoError);
  }
}

}  // namespace
}  // namespace leakaudit
