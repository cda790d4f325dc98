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

#ifndef GEODEX_AGENT_H_
#define GEODEX_AGENT_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "geodex/checkpoint.h"
#include "geodex/encoder.h"
#include "geodex/env.h"
#include "geodex/nn.h"
#include "geodex/random.h"
#include "geodex/replay.h"

namespace geodex {

enum class PolicyMode { kVanilla, kGeometryAware };

std::string_view PolicyModeName(PolicyMode mode);
// Accepts "vanilla" and "geometry-aware"; throws kConfig otherwise.
PolicyMode PolicyModeFromName(std::string_view name);

// Flat observation plus canonical goal quaternion; geometry-aware inputs
// append the encoder feature.
inline constexpr int kPolicyBaseWidth = kObservationDim + kGoalDim;

struct AgentConfig {
  double gamma = 0.98;
  double polyak = 0.05;  // soft target update rate
  double epsilon = 0.3;  // random-action probability
  double sigma = 0.2;    // Gaussian action noise
  int batch = 256;       // per object
  std::vector<int> hidden = {256, 256, 256};
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double action_l2 = 1.0;
  double clip_obs = 5.0;
  double norm_eps = 0.01;
  // Gain on the normalized geometry feature columns. The feature block is far
  // wider than the state, so at unit gain it swamps the first layer.
  double feature_scale = 0.1;
  bool finetune_encoder = false;
  double encoder_lr = 1e-4;
};

void ValidateAgentConfig(const AgentConfig& config);
nlohmann::json AgentConfigToJson(const AgentConfig& config);
// Missing keys keep their defaults; throws kConfig on wrong types.
AgentConfig AgentConfigFromJson(const nlohmann::json& json);

// Running per-coordinate statistics; normalized values are clipped, then
// multiplied by a fixed per-column gain.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(int width, double eps, double clip);

  int width() const { return static_cast<int>(sum_.size()); }
  double count() const { return count_; }
  void Update(const Matrix& rows);
  std::vector<double> Mean() const;
  // sqrt(max(eps^2, variance)); one before any update.
  std::vector<double> Stddev() const;
  Matrix Apply(const Matrix& rows) const;

  std::vector<double>& sum() { return sum_; }
  std::vector<double>& sumsq() { return sumsq_; }
  const std::vector<double>& sum() const { return sum_; }
  const std::vector<double>& sumsq() const { return sumsq_; }
  void set_count(double count) { count_ = count; }
  double eps() const { return eps_; }
  double clip() const { return clip_; }
  // Gains are not statistics; they come from the config and are not saved.
  const std::vector<double>& gain() const { return gain_; }
  void set_gain(int first_column, double gain);

 private:
  std::vector<double> sum_;
  std::vector<double> gain_;
  std::vector<double> sumsq_;
  double count_ = 0.0;
  double eps_ = 0.01;
  double clip_ = 5.0;
};

struct PolicyModel {
  PolicyMode mode = PolicyMode::kVanilla;
  int feature_width = 0;  // zero in vanilla mode
  AgentConfig config;
  Net actor;   // input -> relu hidden -> tanh 20
  Net critic;  // input + action -> relu hidden -> 1
  Net actor_target;
  Net critic_target;
  Normalizer normalizer;
  AdamState actor_adam;
  AdamState critic_adam;

  static PolicyModel Create(PolicyMode mode, const AgentConfig& config, Rng& rng,
                            int feature_width = kFeatureWidth);
  int input_width() const { return kPolicyBaseWidth + feature_width; }

  std::uint64_t ParamHash() const;
  Checkpoint ToCheckpoint() const;
  static PolicyModel FromCheckpoint(const Checkpoint& checkpoint);
};

// Writes one raw policy input row. Throws kShapeMismatch on a wrong row or
// feature width.
void WritePolicyInput(std::span<const double, kObservationDim> obs, const UnitQuaternion& goal,
                      std::span<const double> feature, std::span<double> row);

// Deterministic actor output. Throws kModeMismatch when a feature is given to
// a vanilla model or withheld from a geometry-aware one.
Action Act(const PolicyModel& model, std::span<const double, kObservationDim> obs,
           const UnitQuaternion& goal, std::span<const double> feature = {});
// rows x 20 actions for raw input rows.
Matrix ActBatch(const PolicyModel& model, const Matrix& raw_inputs);

Action ExploreAction(const Action& action, Rng& rng, double epsilon, double sigma);

struct UpdateBatch {
  PolicyMode mode = PolicyMode::kVanilla;
  int object_id = 0;
  Matrix inputs;       // raw, rows x input_width
  Matrix next_inputs;  // raw
  Matrix actions;      // rows x 20
  std::vector<double> rewards;  // {0, 1}
  std::vector<double> dones;
  // Present only when fine-tuning: the encoding behind the feature columns
  // of `inputs`.
  std::optional<EncodeResult> encoding;
};

// Regenerates paired clouds from the stored seeds, with the (possibly
// relabeled) goal, and encodes them. `encoder` may be null in vanilla mode.
UpdateBatch MakeUpdateBatch(const Env& env, const EncoderModel* encoder, PolicyMode mode,
                            std::span<const SampledTransition> samples, bool keep_encoding);

struct AgentGradients {
  std::vector<double> actor;
  std::vector<double> critic;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  Matrix input_grad;  // raw-input gradient of both losses, when requested
};

// Gradients at the current parameters and normalizer statistics; nothing is
// modified.
AgentGradients ComputeAgentGradients(const PolicyModel& model, const UpdateBatch& batch,
                                     bool want_input_grad = false);

// Critic regression targets for a batch, after the reward shift and clamp.
std::vector<double> CriticTargets(const PolicyModel& model, const UpdateBatch& batch);

struct EncoderTuning {
  EncoderModel* encoder = nullptr;
  AdamState* adam = nullptr;
};

struct UpdateLosses {
  double actor = 0.0;   // summed over objects
  double critic = 0.0;
  std::vector<double> per_object_actor;  // ascending object id
  std::vector<double> per_object_critic;
};

struct SummedGradients {
  std::vector<double> actor;
  std::vector<double> critic;
  std::vector<double> encoder;  // empty unless an encoder is tuned
  UpdateLosses losses;
};

// Per-object gradients summed in ascending object id order, at the current
// parameters and normalizer statistics. With `tuned_encoder` the feature
// gradient is carried back into the encoder parameters.
SummedGradients MultiTaskGradients(const PolicyModel& model, std::span<const UpdateBatch> batches,
                                   const EncoderModel* tuned_encoder = nullptr);

// Updates the normalizer from every batch, sums per-object gradients in
// ascending object id order and takes one Adam step for actor and critic
// each. Targets are left alone. Throws kEmptyBatch and kModeMismatch.
UpdateLosses MultiTaskUpdate(PolicyModel& model, std::span<const UpdateBatch> batches,
                             const EncoderTuning& tuning = {});
UpdateLosses DdpgUpdate(PolicyModel& model, const UpdateBatch& batch,
                        const EncoderTuning& tuning = {});

// target <- (1 - tau) target + tau online. Throws kLengthMismatch.
void SoftUpdate(Net& target, const Net& online, double tau);
void UpdateTargets(PolicyModel& model);

}  // namespace geodex

#endif  // GEODEX_AGENT_H_
