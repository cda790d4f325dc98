// Copyright 2026 The Geodex Authors
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

#ifndef GEODEX_ENCODER_H_
#define GEODEX_ENCODER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "geodex/checkpoint.h"
#include "geodex/mesh.h"
#include "geodex/nn.h"
#include "geodex/rotmath.h"

namespace geodex {

inline constexpr int kFeatureWidth = 512;
// Per point: current point, current normal, goal point, goal normal.
inline constexpr int kPairedPointWidth = 12;

// Paired-cloud point encoder: a shared per-point relu trunk, a max-pool over
// points, and two linear heads (class logits, raw 6-vector rotation).
struct EncoderModel {
  Net trunk;
  Net class_head;
  Net rotation_head;
  bool frozen = false;

  static EncoderModel Create(int num_classes, Rng& rng,
                             const std::vector<int>& trunk_widths = {32, 128, kFeatureWidth});

  int num_classes() const { return class_head.output_width(); }
  int feature_width() const { return trunk.output_width(); }

  // Flat view over trunk, class head and rotation head parameters, in that
  // order.
  std::size_t param_count() const;
  std::vector<double> FlatParams() const;
  void SetFlatParams(std::span<const double> flat);
  std::uint64_t ParamHash() const;

  Checkpoint ToCheckpoint() const;
  static EncoderModel FromCheckpoint(const Checkpoint& checkpoint);
};

struct CloudPair {
  const PointCloud* current = nullptr;
  const PointCloud* goal = nullptr;
};

// Batched forward pass with everything needed for backward.
struct EncodeResult {
  int items = 0;
  int points = 0;
  Matrix features;  // items x feature_width
  Matrix logits;    // items x num_classes
  Matrix rot6;      // items x 6
  ForwardCache trunk_cache;  // rows = items * points
  ForwardCache class_cache;
  ForwardCache rotation_cache;
  std::vector<int> argmax;  // items x feature_width, point index per channel
};

// (n x 12) matrix of index-paired points. Throws kShapeMismatch if the
// clouds differ in size.
Matrix PairedInput(const PointCloud& current, const PointCloud& goal);

// All pairs must have the same point count. Point order permutations applied
// jointly to both clouds of a pair leave the outputs bit-identical.
EncodeResult PointNetEncode(const EncoderModel& model, std::span<const CloudPair> pairs);
EncodeResult PointNetEncode(const EncoderModel& model, const PointCloud& current,
                            const PointCloud& goal);

// Accumulates into `param_grad` (length model.param_count(), flat order) the
// gradient of a scalar loss whose partial derivatives w.r.t. the logits,
// rot6 and pooled features are given. Any of the three may be empty
// (0 x 0) to mean zero.
void EncoderBackward(const EncoderModel& model, const EncodeResult& result,
                     const Matrix& logits_grad, const Matrix& rot6_grad,
                     const Matrix& feature_grad, std::span<double> param_grad);

struct PretrainItem {
  int label = 0;
  PointCloud current;
  PointCloud goal;
  RotMat relative;  // goal points = relative * current points
};

struct PretrainBatch {
  std::vector<PretrainItem> items;
};

struct PretrainBatchOptions {
  int batch = 32;
  int points = 128;
  // Forces the relative rotation to identity (diagnostics and tests).
  bool identity_relative = false;
};

PretrainBatch MakePretrainBatch(std::span<const Mesh> objects,
                                const PretrainBatchOptions& options, Rng& rng);

struct PretrainMetrics {
  double l_cls = 0.0;
  double l_rot = 0.0;
  double l_e = 0.0;
  double accuracy = 0.0;
  double rot_err = 0.0;  // mean geodesic angle of the projected prediction
};

struct EncoderLoss {
  PretrainMetrics metrics;
  std::vector<double> grad;  // flat, empty unless requested
};

// Batch-mean L_e = L_cls + alpha * L_rot. With `use_rotation` false the
// rotation branch is skipped entirely.
EncoderLoss ComputeEncoderLoss(const EncoderModel& model, const PretrainBatch& batch,
                               double alpha, bool with_grad, bool use_rotation = true);

// One Adam step on L_e; metrics are computed before the update. Throws
// kFrozenModel.
PretrainMetrics PretrainStep(EncoderModel& model, AdamState& adam,
                             const PretrainBatch& batch, double alpha);

struct PretrainConfig {
  int steps = 5000;
  int batch = 32;
  int points = 128;
  double alpha = 1.0;
  double lr = 2e-3;
  // Learning rate decays linearly to lr * final_lr_fraction.
  double final_lr_fraction = 0.1;
  std::uint64_t seed = 0;
  int validation_batches = 8;
  int log_every = 50;
  std::vector<int> trunk_widths = {32, 128, kFeatureWidth};
};

// Throws kConfig describing the first invalid field.
void ValidatePretrainConfig(const PretrainConfig& config);

struct PretrainLogRow {
  int step = 0;
  PretrainMetrics metrics;
};

struct PretrainResult {
  EncoderModel model;  // frozen
  std::vector<PretrainLogRow> log;
  PretrainMetrics validation;
};

// Batches are drawn from per-index seed streams; every tenth stream index is
// reserved for validation and never trained on. Training step s uses index
// s + s / 9, validation batch v uses index 10 v + 9.
std::uint64_t TrainStreamIndex(int step);
std::uint64_t ValidationStreamIndex(int index);
PretrainBatch ValidationBatch(std::span<const Mesh> objects, const PretrainConfig& config,
                              int index);
PretrainMetrics Validate(const EncoderModel& model, std::span<const Mesh> objects,
                         const PretrainConfig& config);

using PretrainLogSink = std::function<void(const PretrainLogRow&)>;
PretrainResult Pretrain(std::span<const Mesh> objects, const PretrainConfig& config,
                        const PretrainLogSink& sink = {});

// Pooled feature of a frozen model. Throws kNotFrozen.
std::vector<double> Encode(const EncoderModel& model, const PointCloud& current,
                           const PointCloud& goal);
// items x feature_width. Throws kNotFrozen.
Matrix EncodeBatch(const EncoderModel& model, std::span<const CloudPair> pairs);

}  // namespace geodex

#endif  // GEODEX_ENCODER_H_
