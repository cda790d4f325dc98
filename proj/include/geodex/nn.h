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

#ifndef GEODEX_NN_H_
#define GEODEX_NN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "geodex/random.h"

namespace geodex {

// Row-major batch matrix: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation : std::uint32_t { kNone = 0, kRelu = 1, kTanh = 2 };

std::string_view ActivationName(Activation act);

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation activation = Activation::kNone;

  bool operator==(const LayerSpec&) const = default;
};

// Fully connected stack with a single flat parameter array. Layer l stores
// its (in x out) row-major weight block followed by its bias.
class Net {
 public:
  Net() = default;
  // Zero-initialized parameters. Throws kShapeMismatch if widths do not chain.
  explicit Net(std::vector<LayerSpec> layers);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Net Create(std::vector<LayerSpec> layers, Rng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int input_width() const { return layers_.front().in; }
  int output_width() const { return layers_.back().out; }
  std::size_t param_count() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(layers_[layer].in) * layers_[layer].out;
  }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// outputs[0] is the input; outputs[l + 1] is the post-activation output of
// layer l.
struct ForwardCache {
  std::vector<Matrix> outputs;
  const Matrix& output() const { return outputs.back(); }
};

// Throws kShapeMismatch if the input width is wrong.
ForwardCache NetForward(const Net& net, const Matrix& input);

// Backpropagates `output_grad` (gradient w.r.t. the output of layer
// `num_layers - 1`, all layers when negative) and accumulates the parameter
// gradient into `param_grad` (length param_count). Returns the gradient
// w.r.t. the network input.
Matrix NetBackward(const Net& net, const ForwardCache& cache,
                   const Matrix& output_grad, std::span<double> param_grad,
                   int num_layers = -1);

struct CrossEntropyResult {
  double loss = 0.0;
  std::vector<double> grad;  // softmax - one_hot
};

// Log-sum-exp stabilized softmax cross-entropy. Throws kBadLabel.
CrossEntropyResult CrossEntropy(std::span<const double> logits, int label);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static AdamState Zeros(std::size_t n, const AdamConfig& config);
};

// Bias-corrected Adam update in place. Throws kLengthMismatch.
void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state);

// Loss with analytic gradient written to `grad` (resized by the callee).
using LossWithGrad = std::function<double(std::span<const double> params,
                                          std::vector<double>* grad)>;

struct GradCheckOptions {
  int samples = 32;
  double step = 1e-5;
  // Relative errors are |a - n| / max(|a|, |n|, floor).
  double floor = 1e-5;
};

// Central finite differences on `samples` randomly chosen coordinates;
// returns the maximum relative error against the analytic gradient.
double GradCheck(const LossWithGrad& loss, std::span<const double> params,
                 Rng& rng, const GradCheckOptions& options = {});

}  // namespace geodex

#endif  // GEODEX_NN_H_
