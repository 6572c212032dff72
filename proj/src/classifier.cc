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

#include "leakaudit/classifier.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>

#include <malloc.h>

#include "leakaudit/error.h"
#include "leakaudit/rng.h"

namespace leakaudit {
namespace {

constexpr double kBnEpsilon = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void FillUniform(MatrixXd& m, double bound, Rng& rng) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = rng.Uniform(-bound, bound);
  }
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct BatchStats {
  VectorXd mean, var;
};

// Batch norm followed by ReLU, one column (channel) at a time so each column
// stays in cache. Train mode normalizes with the batch statistics.
void BnReluForward(const MatrixXd& z, const BatchNormParams& bn, Mode mode,
                   MatrixXd& norm, MatrixXd& act, VectorXd& mean,
                   VectorXd& inv_std, VectorXd& batch_var) {
  const Index n = z.rows(), channels = z.cols();
  norm.resize(n, channels);
  act.resize(n, channels);
  mean.resize(channels);
  inv_std.resize(channels);
  batch_var.resize(channels);
  for (Index c = 0; c < channels; ++c) {
    const double* zc = z.col(c).data();
    double m, v;
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (Index i = 0; i < n; ++i) sum += zc[i];
      m = sum / static_cast<double>(n);
      double sq = 0.0;
      for (Index i = 0; i < n; ++i) sq += (zc[i] - m) * (zc[i] - m);
      v = sq / static_cast<double>(n);
    } else {
      m = bn.running_mean[c];
      v = bn.running_var[c];
    }
    const double is = 1.0 / std::sqrt(v + kBnEpsilon);
    const double g = bn.gamma[c], b = bn.beta[c];
    double* nc = norm.col(c).data();
    double* ac = act.col(c).data();
    for (Index i = 0; i < n; ++i) {
      const double x = (zc[i] - m) * is;
      nc[i] = x;
      const double y = g * x + b;
      ac[i] = y > 0.0 ? y : 0.0;
    }
    mean[c] = m;
    inv_std[c] = is;
    batch_var[c] = v;
  }
}

// Back through ReLU and batch norm. `grad` holds dL/d(act) on entry and
// dL/dz on exit.
void BnReluBackward(MatrixXd& grad, const MatrixXd& norm, const MatrixXd& act,
                    const BatchNormParams& bn, const VectorXd& inv_std,
                    Mode mode, VectorXd& d_gamma, VectorXd& d_beta) {
  const Index n = grad.rows(), channels = grad.cols();
  const auto nd = static_cast<double>(n);
  d_gamma.resize(channels);
  d_beta.resize(channels);
  for (Index c = 0; c < channels; ++c) {
    double* gc = grad.col(c).data();
    const double* nc = norm.col(c).data();
    const double* ac = act.col(c).data();
    double s1 = 0.0, s2 = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double dy = ac[i] > 0.0 ? gc[i] : 0.0;
      gc[i] = dy;
      s1 += dy;
      s2 += dy * nc[i];
    }
    d_beta[c] = s1;
    d_gamma[c] = s2;
    const double scale = bn.gamma[c] * inv_std[c];
    if (mode == Mode::kEval) {
      for (Index i = 0; i < n; ++i) gc[i] *= scale;
    } else {
      const double k = scale / nd;
      for (Index i = 0; i < n; ++i) gc[i] = k * (nd * gc[i] - s1 - nc[i] * s2);
    }
  }
}

void CheckChunks(const ModelParams& params,
                 std::span<const MatrixXd> chunks) {
  if (chunks.empty()) throw Error(ErrorKind::kNoChunks, "empty batch");
  for (const MatrixXd& c : chunks) {
    if (c.cols() != params.input_dim()) {
      throw Error(ErrorKind::kDimMismatch,
                  "chunk dim " + std::to_string(c.cols()) + " != model dim " +
                      std::to_string(params.input_dim()));
    }
    if (c.rows() < kConvWidth) {
      throw Error(ErrorKind::kDimMismatch, "chunk needs >= 3 frames");
    }
  }
}

struct PassWithStats {
  ForwardPass pass;
  BatchStats bn1, bn2;
};

PassWithStats RunForward(const ModelParams& params,
                         std::span<const MatrixXd> chunks, Mode mode,
                         Pooling pooling) {
  CheckChunks(params, chunks);
  PassWithStats out;
  ForwardPass& p = out.pass;
  const auto batch = static_cast<Index>(chunks.size());
  p.offsets.assign(chunks.size() + 1, 0);
  for (size_t b = 0; b < chunks.size(); ++b) {
    p.offsets[b + 1] = p.offsets[b] + chunks[b].rows();
  }
  const Index n = p.offsets.back();
  p.input.resize(n, params.input_dim());
  for (size_t b = 0; b < chunks.size(); ++b) {
    p.input.middleRows(p.offsets[b], chunks[b].rows()) = chunks[b];
  }

  p.pre_bn1.noalias() = p.input * params.proj_w;
  p.pre_bn1.rowwise() += params.proj_b.transpose();
  BnReluForward(p.pre_bn1, params.bn1, mode, p.norm1, p.act1, p.mean1,
                p.inv_std1, out.bn1.var);
  out.bn1.mean = p.mean1;

  const Index w = kProjectionWidth;
  p.columns = MatrixXd::Zero(n, kConvWidth * w);
  for (size_t b = 0; b < chunks.size(); ++b) {
    const Index o = p.offsets[b];
    const Index t = chunks[b].rows();
    p.columns.block(o + 1, 0, t - 1, w) = p.act1.middleRows(o, t - 1);
    p.columns.block(o, w, t, w) = p.act1.middleRows(o, t);
    p.columns.block(o, 2 * w, t - 1, w) = p.act1.middleRows(o + 1, t - 1);
  }
  p.pre_bn2.noalias() = p.columns * params.conv_w;
  p.pre_bn2.rowwise() += params.conv_b.transpose();
  BnReluForward(p.pre_bn2, params.bn2, mode, p.norm2, p.act2, p.mean2,
                p.inv_std2, out.bn2.var);
  out.bn2.mean = p.mean2;

  p.pooled.resize(batch, kConvChannels);
  for (Index b = 0; b < batch; ++b) {
    Index o = p.offsets[b], t = p.offsets[b + 1] - o;
    if (pooling == Pooling::kInterior) {
      o += 1;
      t -= 2;
    }
    p.pooled.row(b) = p.act2.middleRows(o, t).colwise().mean();
  }
  p.logits = (p.pooled * params.out_w).array() + params.out_b;
  p.scores = p.logits.unaryExpr([](double z) { return Sigmoid(z); });
  return out;
}

VectorXd Backward(const ModelParams& params, const ForwardPass& p,
                  std::span<const double> labels, Mode mode, Pooling pooling) {
  const auto batch = static_cast<Index>(labels.size());
  ModelParams g;
  VectorXd d_logit(batch);
  for (Index b = 0; b < batch; ++b) {
    d_logit[b] = (p.scores[b] - labels[b]) / static_cast<double>(batch);
  }
  g.out_w = p.pooled.transpose() * d_logit;
  g.out_b = d_logit.sum();
  const MatrixXd d_pooled = d_logit * params.out_w.transpose();

  const Index n = p.input.rows();
  MatrixXd d_act2 = MatrixXd::Zero(n, kConvChannels);
  for (Index b = 0; b < batch; ++b) {
    Index o = p.offsets[b], t = p.offsets[b + 1] - o;
    if (pooling == Pooling::kInterior) {
      o += 1;
      t -= 2;
    }
    d_act2.middleRows(o, t).rowwise() =
        d_pooled.row(b) / static_cast<double>(t);
  }
  BnReluBackward(d_act2, p.norm2, p.act2, params.bn2, p.inv_std2, mode,
                 g.bn2.gamma, g.bn2.beta);
  const MatrixXd& dz2 = d_act2;
  g.conv_w.noalias() = p.columns.transpose() * dz2;
  g.conv_b = dz2.colwise().sum().transpose();
  MatrixXd d_cols(n, kConvWidth * kProjectionWidth);
  d_cols.noalias() = dz2 * params.conv_w.transpose();

  const Index w = kProjectionWidth;
  MatrixXd d_act1 = d_cols.middleCols(w, w);
  for (Index b = 0; b < batch; ++b) {
    const Index o = p.offsets[b];
    const Index t = p.offsets[b + 1] - o;
    d_act1.middleRows(o, t - 1) += d_cols.block(o + 1, 0, t - 1, w);
    d_act1.middleRows(o + 1, t - 1) += d_cols.block(o, 2 * w, t - 1, w);
  }
  BnReluBackward(d_act1, p.norm1, p.act1, params.bn1, p.inv_std1, mode,
                 g.bn1.gamma, g.bn1.beta);
  const MatrixXd& dz1 = d_act1;
  g.proj_w.noalias() = p.input.transpose() * dz1;
  g.proj_b = dz1.colwise().sum().transpose();
  return g.Flatten();
}

double MeanBce(const VectorXd& logits, std::span<const double> labels) {
  double loss = 0.0;
  for (Index b = 0; b < logits.size(); ++b) {
    loss += Softplus(logits[b]) - labels[b] * logits[b];
  }
  return loss / static_cast<double>(logits.size());
}

template <typename F>
void ForEachTrainable(F&& f, ModelParams& p) {
  f(p.proj_w.data(), p.proj_w.size(), true);
  f(p.proj_b.data(), p.proj_b.size(), false);
  f(p.bn1.gamma.data(), p.bn1.gamma.size(), false);
  f(p.bn1.beta.data(), p.bn1.beta.size(), false);
  f(p.conv_w.data(), p.conv_w.size(), true);
  f(p.conv_b.data(), p.conv_b.size(), false);
  f(p.bn2.gamma.data(), p.bn2.gamma.size(), false);
  f(p.bn2.beta.data(), p.bn2.beta.size(), false);
  f(p.out_w.data(), p.out_w.size(), true);
  f(&p.out_b, Index{1}, false);
}

}  // namespace

BatchNormParams BatchNormParams::Identity(Index channels) {
  return {VectorXd::Ones(channels), VectorXd::Zero(channels),
          VectorXd::Zero(channels), VectorXd::Ones(channels)};
}

ModelParams ModelParams::Initialize(Index input_dim, uint64_t seed) {
  if (input_dim <= 0) {
    throw Error(ErrorKind::kDimMismatch, "input dim must be positive");
  }
  Rng rng(seed);
  ModelParams p;
  p.proj_w.resize(input_dim, kProjectionWidth);
  FillUniform(p.proj_w, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  p.proj_b = VectorXd::Zero(kProjectionWidth);
  p.bn1 = BatchNormParams::Identity(kProjectionWidth);
  p.conv_w.resize(kConvWidth * kProjectionWidth, kConvChannels);
  FillUniform(p.conv_w,
              1.0 / std::sqrt(static_cast<double>(kConvWidth * kProjectionWidth)),
              rng);
  p.conv_b = VectorXd::Zero(kConvChannels);
  p.bn2 = BatchNormParams::Identity(kConvChannels);
  MatrixXd out(kConvChannels, 1);
  FillUniform(out, 1.0 / std::sqrt(static_cast<double>(kConvChannels)), rng);
  p.out_w = out.col(0);
  p.out_b = 0.0;
  return p;
}

Index ModelParams::NumTrainable() const {
  return proj_w.size() + proj_b.size() + bn1.gamma.size() + bn1.beta.size() +
         conv_w.size() + conv_b.size() + bn2.gamma.size() + bn2.beta.size() +
         out_w.size() + 1;
}

VectorXd ModelParams::Flatten() const {
  VectorXd flat(NumTrainable());
  Index pos = 0;
  ForEachTrainable(
      [&](double* data, Index size, bool) {
        flat.segment(pos, size) = Eigen::Map<const VectorXd>(data, size);
        pos += size;
      },
      const_cast<ModelParams&>(*this));
  return flat;
}

void ModelParams::Unflatten(const VectorXd& flat) {
  if (flat.size() != NumTrainable()) {
    throw Error(ErrorKind::kDimMismatch, "flat parameter size mismatch");
  }
  Index pos = 0;
  ForEachTrainable(
      [&](double* data, Index size, bool) {
        Eigen::Map<VectorXd>(data, size) = flat.segment(pos, size);
        pos += size;
      },
      *this);
}

ChunkSpec ChunkSpec::ForHop(double hop_s, double chunk_s, double overlap_s) {
  if (!(hop_s > 0.0)) throw Error(ErrorKind::kInvalidConfig, "hop must be > 0");
  ChunkSpec spec;
  spec.hop_s = hop_s;
  spec.chunk_frames = static_cast<Index>(std::llround(chunk_s / hop_s));
  const auto overlap = static_cast<Index>(std::llround(overlap_s / hop_s));
  spec.stride_frames = spec.chunk_frames - overlap;
  if (!(spec.chunk_frames > spec.stride_frames && spec.stride_frames > 0)) {
    throw Error(ErrorKind::kInvalidConfig, "degenerate chunk geometry");
  }
  return spec;
}

std::vector<MatrixXd> MakeChunks(const FeatureSequence& features,
                                 const ChunkSpec& spec) {
  const Index n = features.n_frames();
  const Index overlap = spec.overlap_frames();
  std::vector<MatrixXd> chunks;
  if (n == 0) return chunks;
  if (n < spec.chunk_frames) {
    if (n >= overlap) {
      chunks.push_back(features.frames);
    } else {
      MatrixXd padded = MatrixXd::Zero(overlap, features.dim());
      padded.topRows(n) = features.frames;
      chunks.push_back(std::move(padded));
    }
    return chunks;
  }
  Index start = 0;
  for (; start + spec.chunk_frames <= n; start += spec.stride_frames) {
    chunks.push_back(features.frames.middleRows(start, spec.chunk_frames));
  }
  const Index last_end = start - spec.stride_frames + spec.chunk_frames;
  if (last_end < n && n - start >= overlap) {
    chunks.push_back(features.frames.middleRows(start, n - start));
  }
  return chunks;
}

ForwardPass ForwardBatch(const ModelParams& params,
                         std::span<const MatrixXd> chunks, Mode mode,
                         Pooling pooling) {
  return RunForward(params, chunks, mode, pooling).pass;
}

double Forward(const ModelParams& params, const MatrixXd& chunk, Mode mode,
               Pooling pooling) {
  return RunForward(params, std::span(&chunk, 1), mode, pooling).pass.scores[0];
}

double BatchLoss(const ModelParams& params, std::span<const MatrixXd> chunks,
                 std::span<const double> labels, Mode mode) {
  const ForwardPass p = RunForward(params, chunks, mode, Pooling::kAll).pass;
  return MeanBce(p.logits, labels);
}

LossGradient BatchLossGradient(const ModelParams& params,
                               std::span<const MatrixXd> chunks,
                               std::span<const double> labels, Mode mode) {
  if (labels.size() != chunks.size()) {
    throw Error(ErrorKind::kDimMismatch, "one label per chunk");
  }
  const ForwardPass p = RunForward(params, chunks, mode, Pooling::kAll).pass;
  return {MeanBce(p.logits, labels),
          Backward(params, p, labels, mode, Pooling::kAll)};
}

TrainResult Train(std::span<const ChunkedSample> samples,
                  const TrainConfig& config) {
  // Per-step buffers stay on the heap instead of fresh mmaps.
  static std::once_flag tune_malloc;
  std::call_once(tune_malloc, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
  if (config.epochs <= 0 || config.batch_size <= 0 ||
      !(config.learning_rate > 0.0) || config.weight_decay < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "invalid training configuration");
  }
  bool has[2] = {false, false};
  Index dim = -1;
  struct Item {
    const MatrixXd* chunk;
    double label;
  };
  std::vector<Item> items;
  for (const ChunkedSample& s : samples) {
    if (s.chunks.empty()) continue;
    has[s.label != 0] = true;
    for (const MatrixXd& c : s.chunks) {
      if (dim < 0) dim = c.cols();
      items.push_back({&c, static_cast<double>(s.label != 0)});
    }
  }
  if (!has[0] || !has[1]) {
    throw Error(ErrorKind::kDegenerateSplit,
                "training subset lacks one of the classes");
  }

  TrainResult result;
  ModelParams& params = result.params;
  params = ModelParams::Initialize(dim, MixSeed(config.seed, 1));
  VectorXd theta = params.Flatten();
  const Index count = theta.size();
  VectorXd m = VectorXd::Zero(count), v = VectorXd::Zero(count);
  VectorXd decay_mask = VectorXd::Zero(count);
  {
    Index pos = 0;
    ForEachTrainable(
        [&](double*, Index size, bool is_weight) {
          if (is_weight) decay_mask.segment(pos, size).setOnes();
          pos += size;
        },
        params);
  }

  Rng rng(MixSeed(config.seed, 2));
  std::vector<size_t> order(items.size());
  std::vector<MatrixXd> batch;
  std::vector<double> labels;
  int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      batch.clear();
      labels.clear();
      for (size_t i = start; i < end; ++i) {
        batch.push_back(*items[order[i]].chunk);
        labels.push_back(items[order[i]].label);
      }
      const PassWithStats fwd =
          RunForward(params, batch, Mode::kTrain, Pooling::kAll);
      const VectorXd grad =
          Backward(params, fwd.pass, labels, Mode::kTrain, Pooling::kAll);
      epoch_loss += MeanBce(fwd.pass.logits, labels) * (end - start);

      ++step;
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      theta.array() -=
          config.learning_rate *
          ((m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEpsilon) +
           config.weight_decay * decay_mask.array() * theta.array());
      params.Unflatten(theta);

      // Running statistics use the unbiased batch variance.
      const auto rows = static_cast<double>(fwd.pass.input.rows());
      const double unbias = rows > 1 ? rows / (rows - 1.0) : 1.0;
      params.bn1.running_mean = (1.0 - kBnMomentum) * params.bn1.running_mean +
                                kBnMomentum * fwd.bn1.mean;
      params.bn1.running_var = (1.0 - kBnMomentum) * params.bn1.running_var +
                               kBnMomentum * unbias * fwd.bn1.var;
      params.bn2.running_mean = (1.0 - kBnMomentum) * params.bn2.running_mean +
                                kBnMomentum * fwd.bn2.mean;
      params.bn2.running_var = (1.0 - kBnMomentum) * params.bn2.running_var +
                               kBnMomentum * unbias * fwd.bn2.var;
    }
    result.final_epoch_loss = epoch_loss / static_cast<double>(items.size());
  }
  return result;
}

double AverageChunkScores(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::kNoChunks, "no chunk scores");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

double ScoreSample(const ModelParams& params, std::span<const MatrixXd> chunks) {
  if (chunks.empty()) throw Error(ErrorKind::kNoChunks, "sample has no chunks");
  std::vector<double> scores;
  scores.reserve(chunks.size());
  for (const MatrixXd& c : chunks) {
    scores.push_back(Forward(params, c, Mode::kEval));
  }
  return AverageChunkScores(scores);
}

// ---------------------------------------------------------------------------
// Serialization.

namespace {

constexpr uint16_t kModelVersion = 1;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutF64(std::vector<uint8_t>& out, double d) {
  uint64_t raw;
  std::memcpy(&raw, &d, sizeof(raw));
  for (int i = 0; i < 8; ++i) out.push_back((raw >> (8 * i)) & 0xFF);
}

uint64_t GetLe(std::span<const uint8_t> bytes, size_t& pos, int width) {
  if (bytes.size() - pos < static_cast<size_t>(width)) {
    throw Error(ErrorKind::kFormatMismatch, "model file truncated");
  }
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= uint64_t{bytes[pos + i]} << (8 * i);
  pos += width;
  return v;
}

std::vector<VectorXd*> RunningStats(ModelParams& p) {
  return {&p.bn1.running_mean, &p.bn1.running_var, &p.bn2.running_mean,
          &p.bn2.running_var};
}

}  // namespace

std::vector<uint8_t> EncodeModel(const ModelParams& params) {
  std::vector<uint8_t> out = {'L', 'K', 'M', 'P'};
  out.push_back(kModelVersion & 0xFF);
  out.push_back(kModelVersion >> 8);
  PutU32(out, static_cast<uint32_t>(params.input_dim()));
  PutU32(out, static_cast<uint32_t>(kProjectionWidth));
  PutU32(out, static_cast<uint32_t>(kConvChannels));
  PutU32(out, static_cast<uint32_t>(kConvWidth));
  const VectorXd flat = params.Flatten();
  for (Index i = 0; i < flat.size(); ++i) PutF64(out, flat[i]);
  ModelParams copy = params;
  for (VectorXd* stats : RunningStats(copy)) {
    for (Index i = 0; i < stats->size(); ++i) PutF64(out, (*stats)[i]);
  }
  return out;
}

ModelParams DecodeModel(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LKMP", 4) != 0) {
    throw Error(ErrorKind::kFormatMismatch, "missing LKMP magic");
  }
  size_t pos = 4;
  if (GetLe(bytes, pos, 2) != kModelVersion) {
    throw Error(ErrorKind::kFormatMismatch, "unsupported model version");
  }
  const auto dim = static_cast<Index>(GetLe(bytes, pos, 4));
  if (static_cast<Index>(GetLe(bytes, pos, 4)) != kProjectionWidth ||
      static_cast<Index>(GetLe(bytes, pos, 4)) != kConvChannels ||
      static_cast<Index>(GetLe(bytes, pos, 4)) != kConvWidth || dim <= 0) {
    throw Error(ErrorKind::kFormatMismatch, "unexpected model geometry");
  }
  ModelParams params = ModelParams::Initialize(dim, 0);
  auto get_f64 = [&]() {
    const uint64_t raw = GetLe(bytes, pos, 8);
    double d;
    std::memcpy(&d, &raw, sizeof(d));
    return d;
  };
  VectorXd flat(params.NumTrainable());
  for (Index i = 0; i < flat.size(); ++i) flat[i] = get_f64();
  params.Unflatten(flat);
  for (VectorXd* stats : RunningStats(params)) {
    for (Index i = 0; i < stats->size(); ++i) (*stats)[i] = get_f64();
  }
  if (pos != bytes.size()) {
    throw Error(ErrorKind::kFormatMismatch, "trailing bytes in model file");
  }
  return params;
}

void SaveModel(const std::string& path, const ModelParams& params) {
  const std::vector<uint8_t> bytes = EncodeModel(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path);
}

ModelParams LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DecodeModel(bytes);
}

}  // namespace leakaudit
