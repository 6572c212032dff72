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

#ifndef LEAKAUDIT_CLASSIFIER_H_
#define LEAKAUDIT_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "leakaudit/features.h"

namespace leakaudit {

inline constexpr Eigen::Index kProjectionWidth = 64;
inline constexpr Eigen::Index kConvChannels = 128;
inline constexpr Eigen::Index kConvWidth = 3;

struct BatchNormParams {
  Eigen::VectorXd gamma, beta, running_mean, running_var;

  static BatchNormParams Identity(Eigen::Index channels);
};

// Time-distributed projection -> BN -> ReLU -> width-3 same-padded
// convolution -> BN -> ReLU -> temporal mean -> affine -> sigmoid.
struct ModelParams {
  Eigen::MatrixXd proj_w;  // dim x 64
  Eigen::VectorXd proj_b;  // 64
  BatchNormParams bn1;     // 64
  // Row k * 64 + c holds input channel c of tap k, where tap 0 reads frame
  // t - 1, tap 1 frame t and tap 2 frame t + 1.
  Eigen::MatrixXd conv_w;  // 192 x 128
  Eigen::VectorXd conv_b;  // 128
  BatchNormParams bn2;     // 128
  Eigen::VectorXd out_w;   // 128
  double out_b = 0.0;

  Eigen::Index input_dim() const { return proj_w.rows(); }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases,
  // identity batch norm.
  static ModelParams Initialize(Eigen::Index input_dim, uint64_t seed);

  // Trainable parameters only (no running statistics), in declaration order.
  Eigen::VectorXd Flatten() const;
  void Unflatten(const Eigen::VectorXd& flat);
  Eigen::Index NumTrainable() const;
};

// Chunk geometry derived from the feature hop: 5 s windows overlapping by 1 s.
struct ChunkSpec {
  Eigen::Index chunk_frames = 500;
  Eigen::Index stride_frames = 400;
  double hop_s = 0.01;

  static ChunkSpec ForHop(double hop_s, double chunk_s = 5.0,
                          double overlap_s = 1.0);
  Eigen::Index overlap_frames() const { return chunk_frames - stride_frames; }
};

// Windows of chunk_frames at stride_frames. If frames remain after the last
// full window, one more chunk runs from the next stride position to the end,
// kept when it spans at least the overlap (1 s). Sequences shorter than a
// chunk give a single chunk; below 1 s it is zero-padded to 1 s.
std::vector<Eigen::MatrixXd> MakeChunks(const FeatureSequence& features,
                                        const ChunkSpec& spec);

enum class Mode { kTrain, kEval };
enum class Pooling { kAll, kInterior };

// Intermediate values of one forward pass over a batch of chunks, kept for
// back-propagation and for inspection in tests.
struct ForwardPass {
  std::vector<Eigen::Index> offsets;  // chunk b occupies rows [o[b], o[b+1])
  Eigen::MatrixXd input;              // N x dim
  // pre_bn* are the affine outputs; ReLU inputs are gamma * norm + beta.
  Eigen::MatrixXd pre_bn1, norm1, act1;
  Eigen::MatrixXd columns;            // N x 192
  Eigen::MatrixXd pre_bn2, norm2, act2;
  Eigen::VectorXd mean1, inv_std1, mean2, inv_std2;
  Eigen::MatrixXd pooled;             // B x 128
  Eigen::VectorXd logits, scores;
};

ForwardPass ForwardBatch(const ModelParams& params,
                         std::span<const Eigen::MatrixXd> chunks, Mode mode,
                         Pooling pooling = Pooling::kAll);

// Score of one chunk in (0, 1). Train mode normalizes with the chunk's own
// statistics. Throws DimMismatch.
double Forward(const ModelParams& params, const Eigen::MatrixXd& chunk,
               Mode mode, Pooling pooling = Pooling::kAll);

// Mean binary cross-entropy of a batch and its gradient with respect to the
// trainable parameters (flattened like ModelParams::Flatten).
struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

double BatchLoss(const ModelParams& params,
                 std::span<const Eigen::MatrixXd> chunks,
                 std::span<const double> labels, Mode mode);
LossGradient BatchLossGradient(const ModelParams& params,
                               std::span<const Eigen::MatrixXd> chunks,
                               std::span<const double> labels, Mode mode);

struct TrainConfig {
  uint64_t seed = 0;
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 1e-3;
  // Decoupled (AdamW-style) decay applied to weight matrices.
  double weight_decay = 0.0;
};

// A recording's chunks; every chunk inherits the recording label.
struct ChunkedSample {
  std::vector<Eigen::MatrixXd> chunks;
  int label = 0;
};

struct TrainResult {
  ModelParams params;
  double final_epoch_loss = 0.0;
};

// Adam on shuffled mini-batches of chunks for a fixed number of epochs.
// Bitwise deterministic for a given seed and input. Throws DegenerateSplit
// when either class is absent.
TrainResult Train(std::span<const ChunkedSample> samples,
                  const TrainConfig& config);

// Mean of the eval-mode chunk scores. Throws NoChunks.
double ScoreSample(const ModelParams& params,
                   std::span<const Eigen::MatrixXd> chunks);

// Arithmetic mean of chunk scores. Throws NoChunks.
double AverageChunkScores(std::span<const double> scores);

// "LKMP" | version u16 | dim u32 | width u32 | channels u32 | taps u32 |
// float64 parameters (trainable then running statistics), little-endian.
std::vector<uint8_t> EncodeModel(const ModelParams& params);
ModelParams DecodeModel(std::span<const uint8_t> bytes);
void SaveModel(const std::string& path, const ModelParams& params);
ModelParams LoadModel(const std::string& path);

}  // namespace leakaudit

#endif  // LEAKAUDIT_CLASSIFIER_H_
