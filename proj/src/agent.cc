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

#include "geodex/agent.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "geodex/error.h"

namespace geodex {

namespace {

std::vector<LayerSpec> Stack(int in, const std::vector<int>& hidden, int out, Activation last) {
  std::vector<LayerSpec> layers;
  int width = in;
  for (int h : hidden) {
    layers.push_back({width, h, Activation::kRelu});
    width = h;
  }
  layers.push_back({width, out, last});
  return layers;
}

Matrix Concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

void CheckBatch(const PolicyModel& model, const UpdateBatch& batch) {
  if (batch.mode != model.mode) {
    throw Error(ErrorCode::kModeMismatch, "batch built for " +
                                              std::string(PolicyModeName(batch.mode)) +
                                              " given to a " +
                                              std::string(PolicyModeName(model.mode)) + " model");
  }
  const Eigen::Index rows = batch.inputs.rows();
  if (rows == 0) throw Error(ErrorCode::kEmptyBatch, "empty update batch");
  if (batch.inputs.cols() != model.input_width() ||
      batch.next_inputs.cols() != model.input_width() || batch.next_inputs.rows() != rows ||
      batch.actions.rows() != rows || batch.actions.cols() != kActionDim ||
      static_cast<Eigen::Index>(batch.rewards.size()) != rows ||
      static_cast<Eigen::Index>(batch.dones.size()) != rows) {
    throw Error(ErrorCode::kShapeMismatch, "update batch columns disagree");
  }
}

void AddInto(std::vector<double>& total, const std::vector<double>& part) {
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
}

}  // namespace

std::string_view PolicyModeName(PolicyMode mode) {
  return mode == PolicyMode::kVanilla ? "vanilla" : "geometry-aware";
}

PolicyMode PolicyModeFromName(std::string_view name) {
  if (name == "vanilla") return PolicyMode::kVanilla;
  if (name == "geometry-aware") return PolicyMode::kGeometryAware;
  throw Error(ErrorCode::kConfig, "unknown policy mode '" + std::string(name) + "'");
}

void ValidateAgentConfig(const AgentConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, "agent: " + what); };
  if (!(c.gamma >= 0 && c.gamma < 1)) fail("gamma must be in [0, 1)");
  if (!(c.polyak >= 0 && c.polyak <= 1)) fail("polyak must be in [0, 1]");
  if (!(c.epsilon >= 0 && c.epsilon <= 1)) fail("epsilon must be in [0, 1]");
  if (!(c.sigma >= 0)) fail("sigma must be >= 0");
  if (c.batch < 1) fail("batch must be >= 1");
  if (c.hidden.empty()) fail("hidden widths must be non-empty");
  for (int h : c.hidden) {
    if (h < 1) fail("hidden widths must be positive");
  }
  if (!(c.actor_lr > 0) || !(c.critic_lr > 0) || !(c.encoder_lr > 0)) {
    fail("learning rates must be positive");
  }
  if (!(c.action_l2 >= 0)) fail("action_l2 must be >= 0");
  if (!(c.clip_obs > 0) || !(c.norm_eps > 0)) fail("clip_obs and norm_eps must be positive");
  if (!(c.feature_scale > 0)) fail("feature_scale must be positive");
}

nlohmann::json AgentConfigToJson(const AgentConfig& c) {
  return {{"gamma", c.gamma},          {"polyak", c.polyak},
          {"epsilon", c.epsilon},      {"sigma", c.sigma},
          {"batch", c.batch},          {"hidden", c.hidden},
          {"actor_lr", c.actor_lr},    {"critic_lr", c.critic_lr},
          {"action_l2", c.action_l2},  {"clip_obs", c.clip_obs},
          {"norm_eps", c.norm_eps},    {"feature_scale", c.feature_scale},
          {"finetune_encoder", c.finetune_encoder},
          {"encoder_lr", c.encoder_lr}};
}

AgentConfig AgentConfigFromJson(const nlohmann::json& j) {
  AgentConfig c;
  try {
    c.gamma = j.value("gamma", c.gamma);
    c.polyak = j.value("polyak", c.polyak);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.sigma = j.value("sigma", c.sigma);
    c.batch = j.value("batch", c.batch);
    c.hidden = j.value("hidden", c.hidden);
    c.actor_lr = j.value("actor_lr", c.actor_lr);
    c.critic_lr = j.value("critic_lr", c.critic_lr);
    c.action_l2 = j.value("action_l2", c.action_l2);
    c.clip_obs = j.value("clip_obs", c.clip_obs);
    c.norm_eps = j.value("norm_eps", c.norm_eps);
    c.feature_scale = j.value("feature_scale", c.feature_scale);
    c.finetune_encoder = j.value("finetune_encoder", c.finetune_encoder);
    c.encoder_lr = j.value("encoder_lr", c.encoder_lr);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("agent config: ") + e.what());
  }
  return c;
}

Normalizer::Normalizer(int width, double eps, double clip)
    : sum_(width, 0.0), gain_(width, 1.0), sumsq_(width, 0.0), eps_(eps), clip_(clip) {}

void Normalizer::set_gain(int first_column, double gain) {
  for (int c = std::max(first_column, 0); c < width(); ++c) gain_[c] = gain;
}

void Normalizer::Update(const Matrix& rows) {
  if (rows.cols() != width()) throw Error(ErrorCode::kShapeMismatch, "normalizer width");
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (int c = 0; c < width(); ++c) {
      const double v = rows(r, c);
      sum_[c] += v;
      sumsq_[c] += v * v;
    }
  }
  count_ += static_cast<double>(rows.rows());
}

std::vector<double> Normalizer::Mean() const {
  std::vector<double> mean(sum_.size(), 0.0);
  if (count_ > 0) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] = sum_[c] / count_;
  }
  return mean;
}

std::vector<double> Normalizer::Stddev() const {
  std::vector<double> sd(sum_.size(), 1.0);
  if (count_ > 0) {
    for (std::size_t c = 0; c < sd.size(); ++c) {
      const double mean = sum_[c] / count_;
      const double var = sumsq_[c] / count_ - mean * mean;
      sd[c] = std::sqrt(std::max(eps_ * eps_, var));
    }
  }
  return sd;
}

Matrix Normalizer::Apply(const Matrix& rows) const {
  if (rows.cols() != width()) throw Error(ErrorCode::kShapeMismatch, "normalizer width");
  const std::vector<double> mean = Mean();
  const std::vector<double> sd = Stddev();
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (int c = 0; c < width(); ++c) {
      out(r, c) = gain_[c] * std::clamp((rows(r, c) - mean[c]) / sd[c], -clip_, clip_);
    }
  }
  return out;
}

PolicyModel PolicyModel::Create(PolicyMode mode, const AgentConfig& config, Rng& rng,
                                int feature_width) {
  ValidateAgentConfig(config);
  PolicyModel m;
  m.mode = mode;
  m.config = config;
  if (mode == PolicyMode::kGeometryAware) {
    if (feature_width < 1) throw Error(ErrorCode::kConfig, "feature width must be positive");
    m.feature_width = feature_width;
  }
  const int in = m.input_width();
  m.actor = Net::Create(Stack(in, config.hidden, kActionDim, Activation::kTanh), rng);
  m.critic = Net::Create(Stack(in + kActionDim, config.hidden, 1, Activation::kNone), rng);
  m.actor_target = m.actor;
  m.critic_target = m.critic;
  m.normalizer = Normalizer(in, config.norm_eps, config.clip_obs);
  m.normalizer.set_gain(kPolicyBaseWidth, config.feature_scale);
  m.actor_adam = AdamState::Zeros(m.actor.param_count(), {.lr = config.actor_lr});
  m.critic_adam = AdamState::Zeros(m.critic.param_count(), {.lr = config.critic_lr});
  return m;
}

std::uint64_t PolicyModel::ParamHash() const {
  std::vector<double> all(actor.params().begin(), actor.params().end());
  all.insert(all.end(), critic.params().begin(), critic.params().end());
  return HashParams(all);
}

Checkpoint PolicyModel::ToCheckpoint() const {
  Checkpoint ckpt;
  ckpt.component = "agent";
  nlohmann::json meta;
  meta["mode"] = PolicyModeName(mode);
  meta["feature_width"] = feature_width;
  meta["config"] = AgentConfigToJson(config);
  meta["actor_adam_step"] = actor_adam.step;
  meta["critic_adam_step"] = critic_adam.step;
  ckpt.meta_json = meta.dump();
  ckpt.nets = {{"actor", actor},
               {"critic", critic},
               {"actor_target", actor_target},
               {"critic_target", critic_target}};
  ckpt.arrays = {{"normalizer_sum", normalizer.sum()},
                 {"normalizer_sumsq", normalizer.sumsq()},
                 {"normalizer_count", {normalizer.count()}},
                 {"actor_adam_m", actor_adam.m},
                 {"actor_adam_v", actor_adam.v},
                 {"critic_adam_m", critic_adam.m},
                 {"critic_adam_v", critic_adam.v}};
  return ckpt;
}

PolicyModel PolicyModel::FromCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.component != "agent") {
    throw Error(ErrorCode::kFormat, "checkpoint holds '" + ckpt.component + "', not agent");
  }
  const auto meta = nlohmann::json::parse(ckpt.meta_json);
  PolicyModel m;
  m.mode = PolicyModeFromName(meta.at("mode").get<std::string>());
  m.feature_width = meta.at("feature_width").get<int>();
  m.config = AgentConfigFromJson(meta.at("config"));
  m.actor = ckpt.GetNet("actor");
  m.critic = ckpt.GetNet("critic");
  m.actor_target = ckpt.GetNet("actor_target");
  m.critic_target = ckpt.GetNet("critic_target");
  if (m.actor.input_width() != m.input_width() ||
      m.critic.input_width() != m.input_width() + kActionDim ||
      !(m.actor.layers() == m.actor_target.layers()) ||
      !(m.critic.layers() == m.critic_target.layers())) {
    throw Error(ErrorCode::kFormat, "agent checkpoint has inconsistent layouts");
  }
  m.normalizer = Normalizer(m.input_width(), m.config.norm_eps, m.config.clip_obs);
  m.normalizer.set_gain(kPolicyBaseWidth, m.config.feature_scale);
  m.normalizer.sum() = ckpt.GetArray("normalizer_sum");
  m.normalizer.sumsq() = ckpt.GetArray("normalizer_sumsq");
  const auto& count = ckpt.GetArray("normalizer_count");
  if (count.size() != 1 || m.normalizer.sum().size() != m.normalizer.sumsq().size() ||
      static_cast<int>(m.normalizer.sum().size()) != m.input_width()) {
    throw Error(ErrorCode::kFormat, "agent checkpoint has bad normalizer statistics");
  }
  m.normalizer.set_count(count[0]);
  m.actor_adam = AdamState::Zeros(m.actor.param_count(), {.lr = m.config.actor_lr});
  m.critic_adam = AdamState::Zeros(m.critic.param_count(), {.lr = m.config.critic_lr});
  m.actor_adam.m = ckpt.GetArray("actor_adam_m");
  m.actor_adam.v = ckpt.GetArray("actor_adam_v");
  m.critic_adam.m = ckpt.GetArray("critic_adam_m");
  m.critic_adam.v = ckpt.GetArray("critic_adam_v");
  m.actor_adam.step = meta.at("actor_adam_step").get<std::int64_t>();
  m.critic_adam.step = meta.at("critic_adam_step").get<std::int64_t>();
  if (m.actor_adam.m.size() != m.actor.param_count() ||
      m.actor_adam.v.size() != m.actor.param_count() ||
      m.critic_adam.m.size() != m.critic.param_count() ||
      m.critic_adam.v.size() != m.critic.param_count()) {
    throw Error(ErrorCode::kFormat, "agent checkpoint has bad optimizer state");
  }
  return m;
}

void WritePolicyInput(std::span<const double, kObservationDim> obs, const UnitQuaternion& goal,
                      std::span<const double> feature, std::span<double> row) {
  if (row.size() != kPolicyBaseWidth + feature.size()) {
    throw Error(ErrorCode::kShapeMismatch, "policy input row has the wrong width");
  }
  std::copy(obs.begin(), obs.end(), row.begin());
  const auto g = goal.Canonical().ToArray();
  std::copy(g.begin(), g.end(), row.begin() + kObservationDim);
  std::copy(feature.begin(), feature.end(), row.begin() + kPolicyBaseWidth);
}

Matrix ActBatch(const PolicyModel& model, const Matrix& raw_inputs) {
  if (raw_inputs.cols() != model.input_width()) {
    throw Error(ErrorCode::kShapeMismatch, "policy input has the wrong width");
  }
  return NetForward(model.actor, model.normalizer.Apply(raw_inputs)).output();
}

Action Act(const PolicyModel& model, std::span<const double, kObservationDim> obs,
           const UnitQuaternion& goal, std::span<const double> feature) {
  const bool geometric = model.mode == PolicyMode::kGeometryAware;
  if (geometric == feature.empty()) {
    throw Error(ErrorCode::kModeMismatch, geometric ? "geometry-aware policy needs a feature"
                                                    : "vanilla policy takes no feature");
  }
  if (static_cast<int>(feature.size()) != model.feature_width) {
    throw Error(ErrorCode::kShapeMismatch, "feature has the wrong width");
  }
  Matrix row(1, model.input_width());
  WritePolicyInput(obs, goal, feature, std::span<double>(row.data(), row.size()));
  const Matrix out = ActBatch(model, row);
  Action action;
  for (int i = 0; i < kActionDim; ++i) action[i] = out(0, i);
  return action;
}

Action ExploreAction(const Action& action, Rng& rng, double epsilon, double sigma) {
  Action out = action;
  if (Uniform01(rng) < epsilon) {
    for (double& v : out) v = Uniform(rng, -1.0, 1.0);
    return out;
  }
  for (double& v : out) v = std::clamp(v + sigma * StandardNormal(rng), -1.0, 1.0);
  return out;
}

UpdateBatch MakeUpdateBatch(const Env& env, const EncoderModel* encoder, PolicyMode mode,
                            std::span<const SampledTransition> samples, bool keep_encoding) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyBatch, "no transitions to batch");
  const bool geometric = mode == PolicyMode::kGeometryAware;
  if (geometric && encoder == nullptr) {
    throw Error(ErrorCode::kModeMismatch, "geometry-aware batches need an encoder");
  }
  const int rows = static_cast<int>(samples.size());
  const int features = geometric ? encoder->feature_width() : 0;
  const int width = kPolicyBaseWidth + features;
  UpdateBatch batch;
  batch.mode = mode;
  batch.object_id = samples.front().transition.object_id;
  batch.inputs.setZero(rows, width);
  batch.next_inputs.setZero(rows, width);
  batch.actions.resize(rows, kActionDim);
  batch.rewards.resize(rows);
  batch.dones.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const Transition& tr = samples[r].transition;
    WritePolicyInput(tr.obs, tr.goal, {},
                     std::span<double>(batch.inputs.row(r).data(), kPolicyBaseWidth));
    WritePolicyInput(tr.next_obs, tr.goal, {},
                     std::span<double>(batch.next_inputs.row(r).data(), kPolicyBaseWidth));
    for (int i = 0; i < kActionDim; ++i) batch.actions(r, i) = tr.action[i];
    batch.rewards[r] = tr.reward;
    batch.dones[r] = tr.done ? 1.0 : 0.0;
  }
  if (!geometric) return batch;

  // Current clouds first, next clouds after.
  std::vector<PointCloud> clouds(4 * static_cast<std::size_t>(rows));
  std::vector<CloudPair> pairs(2 * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const Transition& tr = samples[r].transition;
    PointCloud* c = &clouds[4 * static_cast<std::size_t>(r)];
    env.PairedClouds(tr.object_id, tr.cloud_seed, ObservedOrientation(tr.obs), tr.goal, &c[0],
                     &c[1]);
    env.PairedClouds(tr.object_id, tr.next_cloud_seed, ObservedOrientation(tr.next_obs), tr.goal,
                     &c[2], &c[3]);
    pairs[r] = {&c[0], &c[1]};
    pairs[rows + r] = {&c[2], &c[3]};
  }
  Matrix current, next;
  if (keep_encoding) {
    batch.encoding = PointNetEncode(*encoder, std::span<const CloudPair>(pairs).first(rows));
    current = batch.encoding->features;
    next = PointNetEncode(*encoder, std::span<const CloudPair>(pairs).subspan(rows)).features;
  } else {
    const Matrix all = EncodeBatch(*encoder, pairs);
    current = all.topRows(rows);
    next = all.bottomRows(rows);
  }
  batch.inputs.rightCols(features) = current;
  batch.next_inputs.rightCols(features) = next;
  return batch;
}

std::vector<double> CriticTargets(const PolicyModel& model, const UpdateBatch& batch) {
  CheckBatch(model, batch);
  const Matrix next = model.normalizer.Apply(batch.next_inputs);
  const Matrix next_actions = NetForward(model.actor_target, next).output();
  const Matrix q = NetForward(model.critic_target, Concat(next, next_actions)).output();
  const double gamma = model.config.gamma;
  const double floor = -1.0 / (1.0 - gamma);
  std::vector<double> y(batch.rewards.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double shifted = batch.rewards[r] - 1.0;
    y[r] = std::clamp(shifted + gamma * (1.0 - batch.dones[r]) * q(r, 0), floor, 0.0);
  }
  return y;
}

AgentGradients ComputeAgentGradients(const PolicyModel& model, const UpdateBatch& batch,
                                     bool want_input_grad) {
  CheckBatch(model, batch);
  const Eigen::Index rows = batch.inputs.rows();
  const int width = model.input_width();
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const Matrix x = model.normalizer.Apply(batch.inputs);
  const std::vector<double> y = CriticTargets(model, batch);
  AgentGradients g;
  g.actor.assign(model.actor.param_count(), 0.0);
  g.critic.assign(model.critic.param_count(), 0.0);

  // Critic: mean squared error against the clamped targets.
  const ForwardCache critic_cache = NetForward(model.critic, Concat(x, batch.actions));
  Matrix dq(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double diff = critic_cache.output()(r, 0) - y[r];
    g.critic_loss += diff * diff * inv_rows;
    dq(r, 0) = 2.0 * diff * inv_rows;
  }
  const Matrix critic_input_grad = NetBackward(model.critic, critic_cache, dq, g.critic);

  // Actor: -mean Q(s, pi(s)) plus an L2 penalty on the actions.
  const ForwardCache actor_cache = NetForward(model.actor, x);
  const Matrix& pi = actor_cache.output();
  const ForwardCache q_cache = NetForward(model.critic, Concat(x, pi));
  const double l2 = model.config.action_l2;
  const double l2_scale = inv_rows / kActionDim;
  Matrix dq_pi = Matrix::Constant(rows, 1, -inv_rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    g.actor_loss -= q_cache.output()(r, 0) * inv_rows;
    for (int i = 0; i < kActionDim; ++i) g.actor_loss += l2 * pi(r, i) * pi(r, i) * l2_scale;
  }
  std::vector<double> unused(model.critic.param_count(), 0.0);
  const Matrix q_input_grad = NetBackward(model.critic, q_cache, dq_pi, unused);
  Matrix dpi = q_input_grad.rightCols(kActionDim);
  dpi += (2.0 * l2 * l2_scale) * pi;
  const Matrix actor_input_grad = NetBackward(model.actor, actor_cache, dpi, g.actor);

  if (want_input_grad) {
    Matrix dx = critic_input_grad.leftCols(width);
    dx += q_input_grad.leftCols(width);
    dx += actor_input_grad;
    // Through the normalizer: gain/std where unclipped, zero where clipped.
    const std::vector<double> sd = model.normalizer.Stddev();
    const std::vector<double>& gain = model.normalizer.gain();
    const double clip = model.normalizer.clip();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (int c = 0; c < width; ++c) {
        dx(r, c) = std::abs(x(r, c)) < clip * gain[c] ? dx(r, c) * gain[c] / sd[c] : 0.0;
      }
    }
    g.input_grad = std::move(dx);
  }
  return g;
}

namespace {

std::vector<std::size_t> ObjectOrder(std::span<const UpdateBatch> batches) {
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return batches[a].object_id < batches[b].object_id;
  });
  return order;
}

void CheckBatches(const PolicyModel& model, std::span<const UpdateBatch> batches,
                  const EncoderModel* tuned_encoder) {
  if (batches.empty()) throw Error(ErrorCode::kEmptyBatch, "no update batches");
  for (const UpdateBatch& batch : batches) {
    CheckBatch(model, batch);
    if (tuned_encoder != nullptr && !batch.encoding) {
      throw Error(ErrorCode::kModeMismatch, "encoder tuning needs batches with encodings");
    }
  }
  if (tuned_encoder != nullptr && model.mode != PolicyMode::kGeometryAware) {
    throw Error(ErrorCode::kModeMismatch, "encoder tuning needs a geometry-aware model");
  }
}

}  // namespace

SummedGradients MultiTaskGradients(const PolicyModel& model, std::span<const UpdateBatch> batches,
                                   const EncoderModel* tuned_encoder) {
  CheckBatches(model, batches, tuned_encoder);
  const bool tune = tuned_encoder != nullptr;
  SummedGradients sum;
  if (tune) sum.encoder.assign(tuned_encoder->param_count(), 0.0);
  for (std::size_t i : ObjectOrder(batches)) {
    const UpdateBatch& batch = batches[i];
    AgentGradients g = ComputeAgentGradients(model, batch, tune);
    if (sum.actor.empty()) {
      sum.actor = std::move(g.actor);
      sum.critic = std::move(g.critic);
    } else {
      AddInto(sum.actor, g.actor);
      AddInto(sum.critic, g.critic);
    }
    sum.losses.actor += g.actor_loss;
    sum.losses.critic += g.critic_loss;
    sum.losses.per_object_actor.push_back(g.actor_loss);
    sum.losses.per_object_critic.push_back(g.critic_loss);
    if (tune) {
      const Matrix feature_grad = g.input_grad.rightCols(model.feature_width);
      EncoderBackward(*tuned_encoder, *batch.encoding, Matrix(), Matrix(), feature_grad,
                      sum.encoder);
    }
  }
  return sum;
}

UpdateLosses MultiTaskUpdate(PolicyModel& model, std::span<const UpdateBatch> batches,
                             const EncoderTuning& tuning) {
  CheckBatches(model, batches, tuning.encoder);
  if (tuning.encoder != nullptr && tuning.adam == nullptr) {
    throw Error(ErrorCode::kConfig, "encoder tuning needs an optimizer state");
  }
  for (std::size_t i : ObjectOrder(batches)) model.normalizer.Update(batches[i].inputs);
  SummedGradients sum = MultiTaskGradients(model, batches, tuning.encoder);
  AdamStep(model.actor.params(), sum.actor, model.actor_adam);
  AdamStep(model.critic.params(), sum.critic, model.critic_adam);
  if (tuning.encoder != nullptr) {
    std::vector<double> flat = tuning.encoder->FlatParams();
    AdamStep(flat, sum.encoder, *tuning.adam);
    tuning.encoder->SetFlatParams(flat);
  }
  return std::move(sum.losses);
}

UpdateLosses DdpgUpdate(PolicyModel& model, const UpdateBatch& batch,
                        const EncoderTuning& tuning) {
  return MultiTaskUpdate(model, std::span<const UpdateBatch>(&batch, 1), tuning);
}

void SoftUpdate(Net& target, const Net& online, double tau) {
  if (!(target.layers() == online.layers()) || target.param_count() != online.param_count()) {
    throw Error(ErrorCode::kLengthMismatch, "target and online layouts differ");
  }
  std::span<double> t = target.params();
  std::span<const double> o = online.params();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * o[i];
}

void UpdateTargets(PolicyModel& model) {
  SoftUpdate(model.actor_target, model.actor, model.config.polyak);
  SoftUpdate(model.critic_target, model.critic, model.config.polyak);
}

}  // namespace geodex
