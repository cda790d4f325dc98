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

#include "geodex/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geodex/error.h"
#include "geodex/kernels.h"

namespace geodex {

namespace {


void ApplyActivation(Activation act, Matrix& y) {
  switch (act) {
    case Activation::kNone:
      break;
    case Activation::kRelu:
      y = y.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      y = y.array().tanh().matrix();
      break;
  }
}

}  // namespace

std::string_view ActivationName(Activation act) {
  switch (act) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "unknown";
}

Net::Net(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::kShapeMismatch, "net has no layers");
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = layers_[l];
    if (spec.in <= 0 || spec.out <= 0) {
      throw Error(ErrorCode::kShapeMismatch, "layer widths must be positive");
    }
    if (l > 0 && layers_[l - 1].out != spec.in) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(l) + " input width does not match");
    }
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(spec.in) * spec.out + spec.out;
  }
  params_.assign(offset, 0.0);
}

Net Net::Create(std::vector<LayerSpec> layers, Rng& rng) {
  Net net(std::move(layers));
  for (int l = 0; l < net.num_layers(); ++l) {
    const LayerSpec& spec = net.layers_[l];
    const double limit = std::sqrt(6.0 / (spec.in + spec.out));
    const std::size_t begin = net.weight_offset(l);
    const std::size_t end = net.bias_offset(l);
    for (std::size_t i = begin; i < end; ++i) {
      net.params_[i] = Uniform(rng, -limit, limit);
    }
  }
  return net;
}

ForwardCache NetForward(const Net& net, const Matrix& input) {
  if (input.cols() != net.input_width()) {
    throw Error(ErrorCode::kShapeMismatch,
                "input width " + std::to_string(input.cols()) + " != " +
                    std::to_string(net.input_width()));
  }
  ForwardCache cache;
  cache.outputs.reserve(net.num_layers() + 1);
  cache.outputs.push_back(input);
  const int rows = static_cast<int>(input.rows());
  for (int l = 0; l < net.num_layers(); ++l) {
    const LayerSpec& spec = net.layers()[l];
    Matrix y(rows, spec.out);
    kernels::DenseForward(cache.outputs.back().data(), rows, spec.in,
                          net.params().data() + net.weight_offset(l),
                          net.params().data() + net.bias_offset(l), spec.out,
                          y.data());
    ApplyActivation(spec.activation, y);
    cache.outputs.push_back(std::move(y));
  }
  return cache;
}

Matrix NetBackward(const Net& net, const ForwardCache& cache,
                   const Matrix& output_grad, std::span<double> param_grad,
                   int num_layers) {
  if (num_layers < 0) num_layers = net.num_layers();
  if (param_grad.size() != net.param_count()) {
    throw Error(ErrorCode::kLengthMismatch, "parameter gradient has wrong length");
  }
  if (static_cast<int>(cache.outputs.size()) < num_layers + 1 ||
      output_grad.rows() != cache.outputs[num_layers].rows() ||
      output_grad.cols() != cache.outputs[num_layers].cols()) {
    throw Error(ErrorCode::kShapeMismatch, "output gradient does not match forward pass");
  }
  Matrix grad = output_grad;
  for (int l = num_layers - 1; l >= 0; --l) {
    const LayerSpec& spec = net.layers()[l];
    const Matrix& x = cache.outputs[l];
    const Matrix& y = cache.outputs[l + 1];
    switch (spec.activation) {
      case Activation::kNone:
        break;
      case Activation::kRelu:
        grad = (y.array() > 0.0).select(grad, 0.0);
        break;
      case Activation::kTanh:
        grad = (grad.array() * (1.0 - y.array().square())).matrix();
        break;
    }
    const int rows = static_cast<int>(grad.rows());
    Matrix xt(spec.in, rows);
    kernels::Transpose(x.data(), rows, spec.in, xt.data());
    kernels::MatMulAccumulate(xt.data(), spec.in, rows, grad.data(), spec.out,
                              param_grad.data() + net.weight_offset(l));
    kernels::ColumnSumsAccumulate(grad.data(), rows, spec.out,
                                  param_grad.data() + net.bias_offset(l));
    Matrix wt(spec.out, spec.in);
    kernels::Transpose(net.params().data() + net.weight_offset(l), spec.in, spec.out,
                       wt.data());
    Matrix next = Matrix::Zero(rows, spec.in);
    kernels::MatMulAccumulate(grad.data(), rows, spec.out, wt.data(), spec.in, next.data());
    grad = std::move(next);
  }
  return grad;
}

CrossEntropyResult CrossEntropy(std::span<const double> logits, int label) {
  const int classes = static_cast<int>(logits.size());
  if (label < 0 || label >= classes) {
    throw Error(ErrorCode::kBadLabel, "label " + std::to_string(label) +
                                          " outside [0, " + std::to_string(classes) + ")");
  }
  const auto top = std::max_element(logits.begin(), logits.end());
  const double max_logit = *top;
  // The top term is exactly 1; summing the rest separately and using log1p
  // keeps confident losses accurate instead of rounding them to zero.
  double rest = 0.0;
  for (auto it = logits.begin(); it != logits.end(); ++it) {
    if (it != top) rest += std::exp(*it - max_logit);
  }
  const double log_sum = max_logit + std::log1p(rest);
  CrossEntropyResult out;
  out.loss = (max_logit - logits[label]) + std::log1p(rest);
  out.grad.resize(classes);
  for (int c = 0; c < classes; ++c) out.grad[c] = std::exp(logits[c] - log_sum);
  out.grad[label] -= 1.0;
  return out;
}

AdamState AdamState::Zeros(std::size_t n, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  state.m.assign(n, 0.0);
  state.v.assign(n, 0.0);
  return state;
}

void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw Error(ErrorCode::kLengthMismatch, "Adam parameter/gradient/state lengths differ");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

double GradCheck(const LossWithGrad& loss, std::span<const double> params,
                 Rng& rng, const GradCheckOptions& options) {
  std::vector<double> work(params.begin(), params.end());
  std::vector<double> analytic;
  loss(work, &analytic);
  if (analytic.size() != work.size()) {
    throw Error(ErrorCode::kLengthMismatch, "analytic gradient has wrong length");
  }
  double worst = 0.0;
  for (int s = 0; s < options.samples; ++s) {
    const std::size_t i = UniformIndex(rng, work.size());
    const double saved = work[i];
    work[i] = saved + options.step;
    const double plus = loss(work, nullptr);
    work[i] = saved - options.step;
    const double minus = loss(work, nullptr);
    work[i] = saved;
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace geodex
