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

#include "geodex/encoder.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "geodex/error.h"
#include "geodex/kernels.h"

namespace geodex {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kBatchStream = 12;

int ArgMax(const Matrix& m, int row) {
  int best = 0;
  for (int c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return best;
}

}  // namespace

std::uint64_t TrainStreamIndex(int step) {
  return static_cast<std::uint64_t>(step) + static_cast<std::uint64_t>(step / 9);
}

std::uint64_t ValidationStreamIndex(int index) {
  return 10ULL * static_cast<std::uint64_t>(index) + 9ULL;
}

EncoderModel EncoderModel::Create(int num_classes, Rng& rng,
                                  const std::vector<int>& trunk_widths) {
  if (num_classes < 1) throw Error(ErrorCode::kBadSpec, "encoder needs >= 1 class");
  if (trunk_widths.empty()) throw Error(ErrorCode::kBadSpec, "encoder trunk needs layers");
  std::vector<LayerSpec> trunk;
  int in = kPairedPointWidth;
  for (int width : trunk_widths) {
    trunk.push_back({in, width, Activation::kRelu});
    in = width;
  }
  EncoderModel model;
  model.trunk = Net::Create(std::move(trunk), rng);
  model.class_head = Net::Create({{in, num_classes, Activation::kNone}}, rng);
  model.rotation_head = Net::Create({{in, 6, Activation::kNone}}, rng);
  return model;
}

std::size_t EncoderModel::param_count() const {
  return trunk.param_count() + class_head.param_count() + rotation_head.param_count();
}

std::vector<double> EncoderModel::FlatParams() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const Net* net : {&trunk, &class_head, &rotation_head}) {
    flat.insert(flat.end(), net->params().begin(), net->params().end());
  }
  return flat;
}

void EncoderModel::SetFlatParams(std::span<const double> flat) {
  if (flat.size() != param_count()) {
    throw Error(ErrorCode::kLengthMismatch, "encoder parameter vector has wrong length");
  }
  std::size_t offset = 0;
  for (Net* net : {&trunk, &class_head, &rotation_head}) {
    std::copy_n(flat.begin() + offset, net->param_count(), net->params().begin());
    offset += net->param_count();
  }
}

std::uint64_t EncoderModel::ParamHash() const { return HashParams(FlatParams()); }

Checkpoint EncoderModel::ToCheckpoint() const {
  Checkpoint ckpt;
  ckpt.component = "encoder";
  nlohmann::json meta;
  meta["frozen"] = frozen;
  meta["num_classes"] = num_classes();
  meta["feature_width"] = feature_width();
  ckpt.meta_json = meta.dump();
  ckpt.nets = {{"trunk", trunk}, {"class_head", class_head}, {"rotation_head", rotation_head}};
  return ckpt;
}

EncoderModel EncoderModel::FromCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.component != "encoder") {
    throw Error(ErrorCode::kFormat, "checkpoint component is '" + ckpt.component +
                                        "', expected 'encoder'");
  }
  EncoderModel model;
  model.trunk = ckpt.GetNet("trunk");
  model.class_head = ckpt.GetNet("class_head");
  model.rotation_head = ckpt.GetNet("rotation_head");
  const auto meta = nlohmann::json::parse(ckpt.meta_json);
  model.frozen = meta.value("frozen", false);
  if (model.trunk.input_width() != kPairedPointWidth ||
      model.class_head.input_width() != model.feature_width() ||
      model.rotation_head.input_width() != model.feature_width() ||
      model.rotation_head.output_width() != 6) {
    throw Error(ErrorCode::kFormat, "encoder checkpoint has inconsistent shapes");
  }
  return model;
}

Matrix PairedInput(const PointCloud& current, const PointCloud& goal) {
  if (current.size() != goal.size()) {
    throw Error(ErrorCode::kShapeMismatch, "paired clouds differ in size");
  }
  Matrix input(static_cast<int>(current.size()), kPairedPointWidth);
  for (std::size_t p = 0; p < current.size(); ++p) {
    const Vec3* parts[4] = {&current.points[p], &current.normals[p], &goal.points[p],
                            &goal.normals[p]};
    for (int k = 0; k < 4; ++k) {
      for (int d = 0; d < 3; ++d) input(static_cast<int>(p), 3 * k + d) = (*parts[k])(d);
    }
  }
  return input;
}

EncodeResult PointNetEncode(const EncoderModel& model, std::span<const CloudPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kShapeMismatch, "no clouds to encode");
  EncodeResult r;
  r.items = static_cast<int>(pairs.size());
  r.points = static_cast<int>(pairs[0].current->size());
  if (r.points < 1) throw Error(ErrorCode::kShapeMismatch, "empty point cloud");
  Matrix input(r.items * r.points, kPairedPointWidth);
  for (int i = 0; i < r.items; ++i) {
    if (static_cast<int>(pairs[i].current->size()) != r.points) {
      throw Error(ErrorCode::kShapeMismatch, "clouds in a batch differ in size");
    }
    input.middleRows(i * r.points, r.points) = PairedInput(*pairs[i].current, *pairs[i].goal);
  }
  r.trunk_cache = NetForward(model.trunk, input);
  const int width = model.feature_width();
  r.features.resize(r.items, width);
  r.argmax.resize(static_cast<std::size_t>(r.items) * width);
  kernels::MaxPoolRows(r.trunk_cache.output().data(), r.items, r.points, width,
                       r.features.data(), r.argmax.data());
  r.class_cache = NetForward(model.class_head, r.features);
  r.rotation_cache = NetForward(model.rotation_head, r.features);
  r.logits = r.class_cache.output();
  r.rot6 = r.rotation_cache.output();
  return r;
}

EncodeResult PointNetEncode(const EncoderModel& model, const PointCloud& current,
                            const PointCloud& goal) {
  const CloudPair pair{&current, &goal};
  return PointNetEncode(model, std::span<const CloudPair>(&pair, 1));
}

void EncoderBackward(const EncoderModel& model, const EncodeResult& result,
                     const Matrix& logits_grad, const Matrix& rot6_grad,
                     const Matrix& feature_grad, std::span<double> param_grad) {
  if (param_grad.size() != model.param_count()) {
    throw Error(ErrorCode::kLengthMismatch, "encoder gradient has wrong length");
  }
  const std::size_t trunk_n = model.trunk.param_count();
  const std::size_t class_n = model.class_head.param_count();
  auto trunk_grad = param_grad.subspan(0, trunk_n);
  auto class_grad = param_grad.subspan(trunk_n, class_n);
  auto rot_grad = param_grad.subspan(trunk_n + class_n, model.rotation_head.param_count());

  const int width = model.feature_width();
  Matrix dfeat = Matrix::Zero(result.items, width);
  if (logits_grad.size() > 0) {
    dfeat += NetBackward(model.class_head, result.class_cache, logits_grad, class_grad);
  }
  if (rot6_grad.size() > 0) {
    dfeat += NetBackward(model.rotation_head, result.rotation_cache, rot6_grad, rot_grad);
  }
  if (feature_grad.size() > 0) {
    if (feature_grad.rows() != result.items || feature_grad.cols() != width) {
      throw Error(ErrorCode::kShapeMismatch, "feature gradient has wrong shape");
    }
    dfeat += feature_grad;
  }

  // Max-pooling routes each channel's gradient to a single point, so the last
  // trunk layer is backpropagated sparsely.
  const int last = model.trunk.num_layers() - 1;
  const LayerSpec& spec = model.trunk.layers()[last];
  const Matrix& h_in = result.trunk_cache.outputs[last];
  const Matrix& h_out = result.trunk_cache.outputs[last + 1];
  // Channel-major scratch keeps the per-channel updates contiguous.
  const int in = spec.in;
  Matrix w_t(width, in);
  kernels::Transpose(model.trunk.params().data() + model.trunk.weight_offset(last), in, width,
                     w_t.data());
  Matrix dw_t = Matrix::Zero(width, in);
  double* db = trunk_grad.data() + model.trunk.bias_offset(last);
  Matrix dh_in = Matrix::Zero(h_in.rows(), in);
  for (int i = 0; i < result.items; ++i) {
    for (int c = 0; c < width; ++c) {
      double g = dfeat(i, c);
      if (g == 0.0) continue;
      const int row = i * result.points + result.argmax[static_cast<std::size_t>(i) * width + c];
      const double y = h_out(row, c);
      if (spec.activation == Activation::kRelu) {
        if (!(y > 0.0)) continue;
      } else if (spec.activation == Activation::kTanh) {
        g *= 1.0 - y * y;
      }
      db[c] += g;
      const double* x = h_in.data() + static_cast<std::size_t>(row) * in;
      const double* wc = w_t.data() + static_cast<std::size_t>(c) * in;
      double* dwc = dw_t.data() + static_cast<std::size_t>(c) * in;
      double* dx = dh_in.data() + static_cast<std::size_t>(row) * in;
#pragma omp simd
      for (int k = 0; k < in; ++k) {
        dwc[k] += g * x[k];
        dx[k] += g * wc[k];
      }
    }
  }
  double* dw = trunk_grad.data() + model.trunk.weight_offset(last);
  for (int k = 0; k < in; ++k) {
    for (int c = 0; c < width; ++c) dw[static_cast<std::size_t>(k) * width + c] += dw_t(c, k);
  }
  if (last > 0) {
    NetBackward(model.trunk, result.trunk_cache, dh_in, trunk_grad, last);
  }
}

PretrainBatch MakePretrainBatch(std::span<const Mesh> objects,
                                const PretrainBatchOptions& options, Rng& rng) {
  if (objects.empty()) throw Error(ErrorCode::kBadSpec, "pretraining needs >= 1 object");
  PretrainBatch batch;
  batch.items.reserve(options.batch);
  for (int b = 0; b < options.batch; ++b) {
    PretrainItem item;
    item.label = static_cast<int>(UniformIndex(rng, objects.size()));
    const PointCloud local = SampleSurface(objects[item.label], options.points, rng);
    const RotMat base = QuatToMatrix(RandomRotationSO3(rng));
    item.current = local.Rotated(base);
    item.relative = options.identity_relative ? RotMat::Identity()
                                              : QuatToMatrix(RandomRotationSO3(rng));
    item.goal = item.current.Rotated(item.relative);
    batch.items.push_back(std::move(item));
  }
  return batch;
}

EncoderLoss ComputeEncoderLoss(const EncoderModel& model, const PretrainBatch& batch,
                               double alpha, bool with_grad, bool use_rotation) {
  const int n = static_cast<int>(batch.items.size());
  if (n == 0) throw Error(ErrorCode::kEmptyBatch, "empty pretraining batch");
  std::vector<CloudPair> pairs;
  pairs.reserve(n);
  for (const auto& item : batch.items) pairs.push_back({&item.current, &item.goal});
  const EncodeResult r = PointNetEncode(model, pairs);

  EncoderLoss out;
  Matrix logits_grad = Matrix::Zero(n, model.num_classes());
  Matrix rot6_grad = Matrix::Zero(n, 6);
  double cls_sum = 0.0, rot_sum = 0.0, err_sum = 0.0;
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const auto& item = batch.items[i];
    const CrossEntropyResult ce = CrossEntropy(
        std::span<const double>(r.logits.data() + static_cast<std::size_t>(i) * r.logits.cols(),
                                r.logits.cols()),
        item.label);
    cls_sum += ce.loss;
    if (ArgMax(r.logits, i) == item.label) ++correct;
    for (int c = 0; c < model.num_classes(); ++c) logits_grad(i, c) = ce.grad[c] / n;
    if (use_rotation) {
      const std::array<double, 6> raw = {r.rot6(i, 0), r.rot6(i, 1), r.rot6(i, 2),
                                         r.rot6(i, 3), r.rot6(i, 4), r.rot6(i, 5)};
      const RotMat predicted = ProjectToSO3(raw);
      const RotationLossResult rl = RotationLoss(predicted.matrix(), item.relative);
      rot_sum += rl.loss;
      err_sum += GeodesicAngle(predicted, item.relative);
      if (with_grad) {
        const auto g = ProjectToSO3Backward(raw, rl.grad * (alpha / n));
        for (int k = 0; k < 6; ++k) rot6_grad(i, k) = g[k];
      }
    }
  }
  out.metrics.l_cls = cls_sum / n;
  out.metrics.l_rot = rot_sum / n;
  out.metrics.l_e = out.metrics.l_cls + alpha * out.metrics.l_rot;
  out.metrics.accuracy = static_cast<double>(correct) / n;
  out.metrics.rot_err = err_sum / n;
  if (with_grad) {
    out.grad.assign(model.param_count(), 0.0);
    EncoderBackward(model, r, logits_grad, use_rotation ? rot6_grad : Matrix(),
                    Matrix(), out.grad);
  }
  return out;
}

PretrainMetrics PretrainStep(EncoderModel& model, AdamState& adam,
                             const PretrainBatch& batch, double alpha) {
  if (model.frozen) throw Error(ErrorCode::kFrozenModel, "encoder is frozen");
  EncoderLoss loss = ComputeEncoderLoss(model, batch, alpha, /*with_grad=*/true);
  std::vector<double> params = model.FlatParams();
  AdamStep(params, loss.grad, adam);
  model.SetFlatParams(params);
  return loss.metrics;
}

PretrainBatch ValidationBatch(std::span<const Mesh> objects, const PretrainConfig& config,
                              int index) {
  Rng rng(DeriveSeed(config.seed, kBatchStream, ValidationStreamIndex(index)));
  return MakePretrainBatch(objects, {config.batch, config.points, false}, rng);
}

PretrainMetrics Validate(const EncoderModel& model, std::span<const Mesh> objects,
                         const PretrainConfig& config) {
  PretrainMetrics sum;
  for (int v = 0; v < config.validation_batches; ++v) {
    const PretrainMetrics m =
        ComputeEncoderLoss(model, ValidationBatch(objects, config, v), config.alpha, false)
            .metrics;
    sum.l_cls += m.l_cls;
    sum.l_rot += m.l_rot;
    sum.l_e += m.l_e;
    sum.accuracy += m.accuracy;
    sum.rot_err += m.rot_err;
  }
  const double n = std::max(1, config.validation_batches);
  return {sum.l_cls / n, sum.l_rot / n, sum.l_e / n, sum.accuracy / n, sum.rot_err / n};
}

void ValidatePretrainConfig(const PretrainConfig& config) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfig, "pretraining: " + what);
  };
  if (config.steps < 0) fail("steps must be >= 0");
  if (config.batch < 1) fail("batch must be >= 1");
  if (config.points < 1) fail("points must be >= 1");
  if (!(config.alpha >= 0)) fail("alpha must be >= 0");
  if (!(config.lr > 0)) fail("lr must be > 0");
  if (!(config.final_lr_fraction >= 0 && config.final_lr_fraction <= 1)) {
    fail("final_lr_fraction must be in [0, 1]");
  }
  if (config.validation_batches < 1) fail("validation_batches must be >= 1");
  if (config.log_every < 0) fail("log_every must be >= 0");
  if (config.trunk_widths.size() != 3) fail("trunk_widths must list three widths");
  for (int w : config.trunk_widths) {
    if (w < 1) fail("trunk widths must be positive");
  }
}

PretrainResult Pretrain(std::span<const Mesh> objects, const PretrainConfig& config,
                        const PretrainLogSink& sink) {
  if (objects.size() < 2) {
    throw Error(ErrorCode::kTooFewObjects, "encoder pretraining needs >= 2 objects");
  }
  ValidatePretrainConfig(config);
  Rng init_rng(DeriveSeed(config.seed, kInitStream));
  PretrainResult result;
  result.model = EncoderModel::Create(static_cast<int>(objects.size()), init_rng,
                                      config.trunk_widths);
  AdamConfig adam_config;
  adam_config.lr = config.lr;
  AdamState adam = AdamState::Zeros(result.model.param_count(), adam_config);
  for (int step = 0; step < config.steps; ++step) {
    const double progress = config.steps > 1 ? static_cast<double>(step) / (config.steps - 1) : 0.0;
    adam.config.lr = config.lr * (1.0 - (1.0 - config.final_lr_fraction) * progress);
    Rng rng(DeriveSeed(config.seed, kBatchStream, TrainStreamIndex(step)));
    const PretrainBatch batch =
        MakePretrainBatch(objects, {config.batch, config.points, false}, rng);
    const PretrainMetrics m = PretrainStep(result.model, adam, batch, config.alpha);
    if (config.log_every > 0 && (step % config.log_every == 0 || step + 1 == config.steps)) {
      PretrainLogRow row{step, m};
      result.log.push_back(row);
      if (sink) sink(row);
    }
  }
  result.model.frozen = true;
  result.validation = Validate(result.model, objects, config);
  return result;
}

std::vector<double> Encode(const EncoderModel& model, const PointCloud& current,
                           const PointCloud& goal) {
  if (!model.frozen) throw Error(ErrorCode::kNotFrozen, "encoder must be frozen to encode");
  const EncodeResult r = PointNetEncode(model, current, goal);
  return std::vector<double>(r.features.data(), r.features.data() + r.features.cols());
}

Matrix EncodeBatch(const EncoderModel& model, std::span<const CloudPair> pairs) {
  if (!model.frozen) throw Error(ErrorCode::kNotFrozen, "encoder must be frozen to encode");
  return PointNetEncode(model, pairs).features;
}

}  // namespace geodex
