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

#include <cmath>
#include <functional>

#include "gtest/gtest.h"
#include "geodex/error.h"

namespace geodex {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

AgentConfig SmallConfig() {
  AgentConfig config;
  config.hidden = {16, 16};
  config.batch = 8;
  return config;
}

Env SmallEnv() {
  EnvConfig config;
  config.cloud_points = 8;
  std::vector<ObjectRecord> objects;
  ShapeSpec box;
  box.size = {0.06, 0.06, 0.06};
  objects.push_back(MakeObjectRecord(NormalizeScale(ProceduralObject(box)), 0.2));
  box.size = {0.03, 0.03, 0.12};
  objects.push_back(MakeObjectRecord(NormalizeScale(ProceduralObject(box)), 0.2));
  return Env(config, objects);
}

EncoderModel TinyEncoder(bool frozen = true) {
  Rng rng(99);
  EncoderModel model = EncoderModel::Create(2, rng, {8, 16, 16});
  model.frozen = frozen;
  return model;
}

// Rolls random actions on `object_id` and returns the recorded episode.
Episode RandomEpisode(const Env& env, int object_id, Rng& rng, int length = 10) {
  EnvState state = env.Reset(object_id, GoalMode::kZAxis, rng);
  Observation obs = env.Observe(state, false, rng);
  Episode episode;
  for (int t = 0; t < length; ++t) {
    Action action;
    for (double& v : action) v = Uniform(rng, -1, 1);
    const StepResult step = env.Step(state, action);
    const Observation next = env.Observe(step.state, false, rng);
    Transition tr;
    tr.object_id = object_id;
    tr.step = t;
    tr.obs = obs.Flat();
    tr.next_obs = next.Flat();
    tr.action = action;
    tr.achieved = step.state.orientation;
    tr.goal = state.goal;
    tr.reward = step.reward;
    tr.done = step.done;
    tr.cloud_seed = obs.cloud_seed;
    tr.next_cloud_seed = next.cloud_seed;
    episode.push_back(tr);
    state = step.state;
    obs = next;
  }
  return episode;
}

std::vector<SampledTransition> Samples(const Env& env, int object_id, int count, Rng& rng) {
  EpisodeBuffer buffer({.relabel_k = 4}, env.num_objects());
  for (int e = 0; e < 3; ++e) buffer.Insert(RandomEpisode(env, object_id, rng));
  return buffer.SampleObject(object_id, count, rng);
}

// Random raw batch with varied rewards and done flags, for gradient checks.
UpdateBatch RandomBatch(const PolicyModel& model, int rows, Rng& rng, int object_id = 0) {
  UpdateBatch batch;
  batch.mode = model.mode;
  batch.object_id = object_id;
  batch.inputs.resize(rows, model.input_width());
  batch.next_inputs.resize(rows, model.input_width());
  batch.actions.resize(rows, kActionDim);
  for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) {
    batch.inputs.data()[i] = Uniform(rng, -1, 1);
    batch.next_inputs.data()[i] = Uniform(rng, -1, 1);
  }
  for (Eigen::Index i = 0; i < batch.actions.size(); ++i) {
    batch.actions.data()[i] = Uniform(rng, -1, 1);
  }
  for (int r = 0; r < rows; ++r) {
    batch.rewards.push_back(r % 3 == 0 ? 1.0 : 0.0);
    batch.dones.push_back(r % 4 == 0 ? 1.0 : 0.0);
  }
  return batch;
}

// A model whose normalizer has seen data, so normalization is not the
// identity.
PolicyModel WarmModel(PolicyMode mode, Rng& rng, int feature_width = 16,
                      AgentConfig config = SmallConfig()) {
  PolicyModel model = PolicyModel::Create(mode, config, rng, feature_width);
  Matrix rows(64, model.input_width());
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = Uniform(rng, -2, 3);
  model.normalizer.Update(rows);
  return model;
}

TEST(PolicyModeTest, NamesRoundTrip) {
  EXPECT_EQ(PolicyModeFromName("vanilla"), PolicyMode::kVanilla);
  EXPECT_EQ(PolicyModeFromName(PolicyModeName(PolicyMode::kGeometryAware)),
            PolicyMode::kGeometryAware);
  EXPECT_EQ(CodeOf([] { PolicyModeFromName("oracle"); }), ErrorCode::kConfig);
}

TEST(PolicyModelTest, LayoutsFollowMode) {
  Rng rng(1);
  const PolicyModel vanilla = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  EXPECT_EQ(vanilla.input_width(), 57);
  EXPECT_EQ(vanilla.actor.input_width(), 57);
  EXPECT_EQ(vanilla.critic.input_width(), 77);
  EXPECT_EQ(vanilla.actor.output_width(), kActionDim);
  EXPECT_EQ(vanilla.critic.output_width(), 1);
  const PolicyModel geo = PolicyModel::Create(PolicyMode::kGeometryAware, SmallConfig(), rng);
  EXPECT_EQ(geo.actor.input_width(), 57 + kFeatureWidth);
  EXPECT_EQ(geo.critic.input_width(), 57 + kFeatureWidth + kActionDim);
  EXPECT_TRUE(geo.actor.layers() == geo.actor_target.layers());
  EXPECT_TRUE(geo.critic.layers() == geo.critic_target.layers());
  EXPECT_EQ(geo.actor.layers().back().activation, Activation::kTanh);
}

TEST(PolicyModelTest, RejectsBadConfig) {
  Rng rng(2);
  AgentConfig config = SmallConfig();
  config.gamma = 1.0;
  EXPECT_EQ(CodeOf([&] { PolicyModel::Create(PolicyMode::kVanilla, config, rng); }),
            ErrorCode::kConfig);
  config = SmallConfig();
  config.hidden = {};
  EXPECT_EQ(CodeOf([&] { PolicyModel::Create(PolicyMode::kVanilla, config, rng); }),
            ErrorCode::kConfig);
}

TEST(ActTest, ZeroFinalLayerGivesZeroAction) {
  Rng rng(3);
  PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  const int last = model.actor.num_layers() - 1;
  auto params = model.actor.params();
  std::fill(params.begin() + model.actor.weight_offset(last), params.end(), 0.0);
  std::array<double, kObservationDim> obs;
  for (double& v : obs) v = Uniform(rng, -1, 1);
  for (double v : Act(model, obs, RandomRotationSO3(rng))) EXPECT_EQ(v, 0.0);
}

TEST(ActTest, DeterministicAndBounded) {
  Rng rng(4);
  PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  // Large weights saturate the tanh; outputs must still be in range.
  for (double& w : model.actor.params()) w *= 50;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, kObservationDim> obs;
    for (double& v : obs) v = Uniform(rng, -100, 100);
    const UnitQuaternion goal = RandomRotationSO3(rng);
    const Action a = Act(model, obs, goal);
    EXPECT_EQ(a, Act(model, obs, goal));
    for (double v : a) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(ActTest, FeatureMustMatchMode) {
  Rng rng(5);
  const PolicyModel vanilla = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  const PolicyModel geo = PolicyModel::Create(PolicyMode::kGeometryAware, SmallConfig(), rng, 16);
  std::array<double, kObservationDim> obs{};
  std::vector<double> feature(16, 0.5);
  const UnitQuaternion goal;
  EXPECT_EQ(CodeOf([&] { Act(vanilla, obs, goal, feature); }), ErrorCode::kModeMismatch);
  EXPECT_EQ(CodeOf([&] { Act(geo, obs, goal); }), ErrorCode::kModeMismatch);
  EXPECT_EQ(CodeOf([&] { Act(geo, obs, goal, std::vector<double>(15)); }),
            ErrorCode::kShapeMismatch);
  EXPECT_NO_THROW(Act(geo, obs, goal, feature));
}

TEST(ActTest, GoalEntersCanonically) {
  Rng rng(6);
  const PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  std::array<double, kObservationDim> obs{};
  const UnitQuaternion goal = RandomRotationSO3(rng);
  EXPECT_EQ(Act(model, obs, goal), Act(model, obs, goal.Negated()));
}

TEST(ExploreActionTest, NoNoiseLeavesActionUnchanged) {
  Rng rng(7);
  Action a;
  for (double& v : a) v = Uniform(rng, -1, 1);
  EXPECT_EQ(ExploreAction(a, rng, 0.0, 0.0), a);
}

TEST(ExploreActionTest, RandomActionsHaveUniformMoments) {
  Rng rng(8);
  Action zero{};
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double v = ExploreAction(zero, rng, 1.0, 0.2)[i % kActionDim];
    sum += v;
    sumsq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 3 * std::sqrt(1.0 / 3.0 / n));
  // Var(x^2) = 1/5 - 1/9 for x uniform on [-1, 1].
  EXPECT_NEAR(sumsq / n, 1.0 / 3.0, 3 * std::sqrt((1.0 / 5 - 1.0 / 9) / n));
}

TEST(ExploreActionTest, AlwaysWithinBounds) {
  Rng rng(9);
  Action a;
  for (int i = 0; i < 2000; ++i) {
    for (double& v : a) v = Uniform(rng, -1, 1);
    for (double v : ExploreAction(a, rng, 0.3, 2.0)) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(CriticTargetsTest, ZeroDiscountGivesShiftedReward) {
  Rng rng(10);
  AgentConfig config = SmallConfig();
  config.gamma = 0.0;
  const PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0, config);
  const UpdateBatch batch = RandomBatch(model, 12, rng);
  const std::vector<double> y = CriticTargets(model, batch);
  for (std::size_t r = 0; r < y.size(); ++r) EXPECT_EQ(y[r], batch.rewards[r] - 1.0);
}

TEST(CriticTargetsTest, AlwaysClamped) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0);
    // Inflate the target critic so raw targets fall far outside the range.
    for (double& w : model.critic_target.params()) w *= 30 * Uniform(rng, -1, 1);
    const UpdateBatch batch = RandomBatch(model, 32, rng);
    for (double y : CriticTargets(model, batch)) {
      ASSERT_GE(y, -1.0 / (1.0 - model.config.gamma));
      ASSERT_LE(y, 0.0);
    }
  }
}

TEST(AgentGradientTest, CriticMatchesFiniteDifferences) {
  Rng rng(12);
  const PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0);
  const UpdateBatch batch = RandomBatch(model, 6, rng);
  auto loss = [&](std::span<const double> params, std::vector<double>* grad) {
    PolicyModel m = model;
    std::copy(params.begin(), params.end(), m.critic.params().begin());
    AgentGradients g = ComputeAgentGradients(m, batch);
    if (grad != nullptr) *grad = g.critic;
    return g.critic_loss;
  };
  EXPECT_LT(GradCheck(loss, model.critic.params(), rng, {.samples = 200}), 1e-4);
}

TEST(AgentGradientTest, ActorMatchesFiniteDifferences) {
  Rng rng(13);
  const PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0);
  const UpdateBatch batch = RandomBatch(model, 6, rng);
  auto loss = [&](std::span<const double> params, std::vector<double>* grad) {
    PolicyModel m = model;
    std::copy(params.begin(), params.end(), m.actor.params().begin());
    AgentGradients g = ComputeAgentGradients(m, batch);
    if (grad != nullptr) *grad = g.actor;
    return g.actor_loss;
  };
  EXPECT_LT(GradCheck(loss, model.actor.params(), rng, {.samples = 200}), 1e-4);
}

TEST(AgentGradientTest, InputGradientMatchesFiniteDifferences) {
  Rng rng(14);
  const PolicyModel model = WarmModel(PolicyMode::kGeometryAware, rng, 16);
  const UpdateBatch batch = RandomBatch(model, 4, rng);
  const AgentGradients base = ComputeAgentGradients(model, batch, true);
  ASSERT_EQ(base.input_grad.rows(), 4);
  ASSERT_EQ(base.input_grad.cols(), model.input_width());
  auto loss = [&](std::span<const double> inputs, std::vector<double>* grad) {
    UpdateBatch b = batch;
    std::copy(inputs.begin(), inputs.end(), b.inputs.data());
    AgentGradients g = ComputeAgentGradients(model, b, grad != nullptr);
    if (grad != nullptr) grad->assign(g.input_grad.data(), g.input_grad.data() + g.input_grad.size());
    return g.actor_loss + g.critic_loss;
  };
  std::vector<double> inputs(batch.inputs.data(), batch.inputs.data() + batch.inputs.size());
  EXPECT_LT(GradCheck(loss, inputs, rng, {.samples = 150}), 1e-4);
}

TEST(AgentUpdateTest, CriticConvergesOnFixedTransition) {
  Rng rng(15);
  AgentConfig config = SmallConfig();
  config.critic_lr = 3e-3;
  PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, config, rng);
  const UpdateBatch batch = RandomBatch(model, 1, rng);
  for (int i = 0; i < 1500; ++i) DdpgUpdate(model, batch);
  const double y = CriticTargets(model, batch)[0];
  const Matrix x = model.normalizer.Apply(batch.inputs);
  Matrix input(1, x.cols() + kActionDim);
  input << x, batch.actions;
  EXPECT_NEAR(NetForward(model.critic, input).output()(0, 0), y, 1e-3);
}

TEST(AgentUpdateTest, RejectsEmptyAndMismatchedBatches) {
  Rng rng(16);
  PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  EXPECT_EQ(CodeOf([&] { MultiTaskUpdate(model, {}); }), ErrorCode::kEmptyBatch);
  UpdateBatch empty = RandomBatch(model, 1, rng);
  empty.inputs.resize(0, model.input_width());
  EXPECT_EQ(CodeOf([&] { DdpgUpdate(model, empty); }), ErrorCode::kEmptyBatch);
  UpdateBatch other = RandomBatch(model, 2, rng);
  other.mode = PolicyMode::kGeometryAware;
  EXPECT_EQ(CodeOf([&] { DdpgUpdate(model, other); }), ErrorCode::kModeMismatch);
  EXPECT_EQ(model.normalizer.count(), 0.0);
}

TEST(AgentUpdateTest, NormalizerUpdatedBeforeUse) {
  Rng rng(17);
  PolicyModel model = PolicyModel::Create(PolicyMode::kVanilla, SmallConfig(), rng);
  const UpdateBatch batch = RandomBatch(model, 5, rng);
  PolicyModel manual = model;
  manual.normalizer.Update(batch.inputs);
  const AgentGradients g = ComputeAgentGradients(manual, batch);
  const UpdateLosses losses = DdpgUpdate(model, batch);
  EXPECT_EQ(model.normalizer.count(), 5.0);
  EXPECT_EQ(losses.critic, g.critic_loss);
  EXPECT_EQ(losses.actor, g.actor_loss);
}

TEST(SoftUpdateTest, Interpolates) {
  Rng rng(18);
  const Net online = Net::Create({{3, 4, Activation::kRelu}, {4, 2, Activation::kNone}}, rng);
  Net target(online.layers());
  Net copy = target;
  SoftUpdate(copy, online, 0.0);
  EXPECT_TRUE(std::equal(copy.params().begin(), copy.params().end(), target.params().begin()));
  copy = target;
  SoftUpdate(copy, online, 1.0);
  EXPECT_TRUE(std::equal(copy.params().begin(), copy.params().end(), online.params().begin()));
  SoftUpdate(target, online, 0.5);
  SoftUpdate(target, online, 0.5);
  for (std::size_t i = 0; i < target.param_count(); ++i) {
    EXPECT_DOUBLE_EQ(target.params()[i], 0.75 * online.params()[i]);
  }
  Net wrong({{3, 5, Activation::kRelu}, {5, 2, Activation::kNone}});
  EXPECT_EQ(CodeOf([&] { SoftUpdate(wrong, online, 0.5); }), ErrorCode::kLengthMismatch);
}

TEST(MultiTaskTest, SingleObjectMatchesDdpgUpdate) {
  Rng rng(19);
  PolicyModel a = WarmModel(PolicyMode::kVanilla, rng, 0);
  PolicyModel b = a;
  const UpdateBatch batch = RandomBatch(a, 8, rng);
  MultiTaskUpdate(a, std::span<const UpdateBatch>(&batch, 1));
  DdpgUpdate(b, batch);
  EXPECT_EQ(a.ParamHash(), b.ParamHash());
  EXPECT_EQ(a.ToCheckpoint().arrays[0].values, b.ToCheckpoint().arrays[0].values);
}

TEST(MultiTaskTest, DuplicatedBatchDoublesGradient) {
  Rng rng(20);
  const PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0);
  const UpdateBatch batch = RandomBatch(model, 8, rng);
  const std::vector<UpdateBatch> twice = {batch, batch};
  const SummedGradients single = MultiTaskGradients(model, std::span(&batch, 1));
  const SummedGradients doubled = MultiTaskGradients(model, twice);
  for (std::size_t i = 0; i < single.actor.size(); ++i) {
    ASSERT_EQ(doubled.actor[i], 2 * single.actor[i]);
  }
  for (std::size_t i = 0; i < single.critic.size(); ++i) {
    ASSERT_EQ(doubled.critic[i], 2 * single.critic[i]);
  }
}

TEST(MultiTaskTest, SumIsAdditiveAndOrderFree) {
  Rng rng(21);
  const PolicyModel model = WarmModel(PolicyMode::kVanilla, rng, 0);
  std::vector<UpdateBatch> batches;
  for (int id = 0; id < 4; ++id) batches.push_back(RandomBatch(model, 8, rng, id));
  std::vector<UpdateBatch> shuffled = {batches[2], batches[0], batches[3], batches[1]};
  const SummedGradients sum = MultiTaskGradients(model, batches);
  const SummedGradients other = MultiTaskGradients(model, shuffled);
  std::vector<double> manual(model.critic.param_count(), 0.0);
  for (const UpdateBatch& b : batches) {
    const AgentGradients g = ComputeAgentGradients(model, b);
    for (std::size_t i = 0; i < manual.size(); ++i) manual[i] += g.critic[i];
  }
  for (std::size_t i = 0; i < manual.size(); ++i) {
    ASSERT_NEAR(sum.critic[i], manual[i], 1e-12);
    ASSERT_NEAR(other.critic[i], sum.critic[i], 1e-12);
  }
  for (std::size_t i = 0; i < sum.actor.size(); ++i) {
    ASSERT_NEAR(other.actor[i], sum.actor[i], 1e-12);
  }
  // Losses are reported in ascending object id order whatever the input
  // order.
  EXPECT_EQ(sum.losses.per_object_critic, other.losses.per_object_critic);
}

TEST(MakeUpdateBatchTest, VanillaLayout) {
  Rng rng(22);
  const Env env = SmallEnv();
  const auto samples = Samples(env, 1, 6, rng);
  const UpdateBatch batch = MakeUpdateBatch(env, nullptr, PolicyMode::kVanilla, samples, false);
  ASSERT_EQ(batch.inputs.cols(), kPolicyBaseWidth);
  for (int r = 0; r < 6; ++r) {
    const Transition& tr = samples[r].transition;
    for (int i = 0; i < kObservationDim; ++i) {
      EXPECT_EQ(batch.inputs(r, i), tr.obs[i]);
      EXPECT_EQ(batch.next_inputs(r, i), tr.next_obs[i]);
    }
    const auto g = tr.goal.Canonical().ToArray();
    for (int k = 0; k < 4; ++k) EXPECT_EQ(batch.inputs(r, kObservationDim + k), g[k]);
    EXPECT_EQ(batch.rewards[r], tr.reward);
  }
  EXPECT_EQ(CodeOf([&] { MakeUpdateBatch(env, nullptr, PolicyMode::kVanilla, {}, false); }),
            ErrorCode::kEmptyBatch);
}

TEST(MakeUpdateBatchTest, FeaturesEncodeRelabeledGoalClouds) {
  Rng rng(23);
  const Env env = SmallEnv();
  const EncoderModel encoder = TinyEncoder();
  const auto samples = Samples(env, 0, 5, rng);
  const UpdateBatch batch =
      MakeUpdateBatch(env, &encoder, PolicyMode::kGeometryAware, samples, false);
  ASSERT_EQ(batch.inputs.cols(), kPolicyBaseWidth + 16);
  for (int r = 0; r < 5; ++r) {
    const Transition& tr = samples[r].transition;
    PointCloud current, goal;
    env.PairedClouds(0, tr.cloud_seed, ObservedOrientation(tr.obs), tr.goal, &current, &goal);
    const std::vector<double> expected = Encode(encoder, current, goal);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(batch.inputs(r, kPolicyBaseWidth + i), expected[i]);
    env.PairedClouds(0, tr.next_cloud_seed, ObservedOrientation(tr.next_obs), tr.goal, &current,
                     &goal);
    const std::vector<double> next = Encode(encoder, current, goal);
    for (int i = 0; i < 16; ++i) EXPECT_EQ(batch.next_inputs(r, kPolicyBaseWidth + i), next[i]);
  }
  EXPECT_EQ(CodeOf([&] {
              MakeUpdateBatch(env, nullptr, PolicyMode::kGeometryAware, samples, false);
            }),
            ErrorCode::kModeMismatch);
}

TEST(GeometryAwareTest, FrozenEncoderNeverChanges) {
  Rng rng(24);
  const Env env = SmallEnv();
  const EncoderModel encoder = TinyEncoder();
  const std::uint64_t hash = encoder.ParamHash();
  PolicyModel model = PolicyModel::Create(PolicyMode::kGeometryAware, SmallConfig(), rng, 16);
  for (int i = 0; i < 5; ++i) {
    std::vector<UpdateBatch> batches;
    for (int id = 0; id < 2; ++id) {
      batches.push_back(MakeUpdateBatch(env, &encoder, PolicyMode::kGeometryAware,
                                        Samples(env, id, 8, rng), false));
    }
    MultiTaskUpdate(model, batches);
    UpdateTargets(model);
  }
  EXPECT_EQ(encoder.ParamHash(), hash);
}

TEST(GeometryAwareTest, FineTuningMovesEncoder) {
  Rng rng(25);
  const Env env = SmallEnv();
  EncoderModel encoder = TinyEncoder(false);
  AdamState adam = AdamState::Zeros(encoder.param_count(), {.lr = 1e-3});
  const std::uint64_t hash = encoder.ParamHash();
  PolicyModel model = PolicyModel::Create(PolicyMode::kGeometryAware, SmallConfig(), rng, 16);
  const UpdateBatch batch =
      MakeUpdateBatch(env, &encoder, PolicyMode::kGeometryAware, Samples(env, 1, 8, rng), true);
  ASSERT_TRUE(batch.encoding.has_value());
  const UpdateLosses losses = DdpgUpdate(model, batch, {&encoder, &adam});
  EXPECT_TRUE(std::isfinite(losses.actor) && std::isfinite(losses.critic));
  EXPECT_NE(encoder.ParamHash(), hash);
  EXPECT_EQ(adam.step, 1);
  UpdateBatch bare = batch;
  bare.encoding.reset();
  EXPECT_EQ(CodeOf([&] { DdpgUpdate(model, bare, {&encoder, &adam}); }),
            ErrorCode::kModeMismatch);
}

TEST(GeometryAwareTest, EncoderGradientMatchesFiniteDifferences) {
  Rng rng(26);
  const Env env = SmallEnv();
  const EncoderModel encoder = TinyEncoder(false);
  const PolicyModel model = WarmModel(PolicyMode::kGeometryAware, rng, 16);
  const auto samples = Samples(env, 0, 3, rng);
  auto loss = [&](std::span<const double> params, std::vector<double>* grad) {
    EncoderModel e = encoder;
    e.SetFlatParams(params);
    const UpdateBatch batch = MakeUpdateBatch(env, &e, PolicyMode::kGeometryAware, samples, true);
    // Next-state features feed only the targets, which carry no gradient;
    // hold them at the unperturbed encoder so the loss matches.
    UpdateBatch fixed = batch;
    fixed.next_inputs = MakeUpdateBatch(env, &encoder, PolicyMode::kGeometryAware, samples, true)
                            .next_inputs;
    const SummedGradients g = MultiTaskGradients(model, std::span(&fixed, 1), &e);
    if (grad != nullptr) *grad = g.encoder;
    return g.losses.actor + g.losses.critic;
  };
  const std::vector<double> flat = encoder.FlatParams();
  EXPECT_LT(GradCheck(loss, flat, rng, {.samples = 150}), 1e-4);
}

TEST(PolicyModelTest, CheckpointRoundTripContinuesIdentically) {
  Rng rng(27);
  PolicyModel model = WarmModel(PolicyMode::kGeometryAware, rng, 16);
  for (int i = 0; i < 3; ++i) {
    DdpgUpdate(model, RandomBatch(model, 8, rng));
    UpdateTargets(model);
  }
  const std::string bytes = SerializeCheckpoint(model.ToCheckpoint());
  PolicyModel loaded = PolicyModel::FromCheckpoint(ParseCheckpoint(bytes));
  EXPECT_EQ(SerializeCheckpoint(loaded.ToCheckpoint()), bytes);
  const UpdateBatch batch = RandomBatch(model, 8, rng);
  DdpgUpdate(model, batch);
  DdpgUpdate(loaded, batch);
  EXPECT_EQ(SerializeCheckpoint(loaded.ToCheckpoint()), SerializeCheckpoint(model.ToCheckpoint()));
  Checkpoint other = model.ToCheckpoint();
  other.component = "encoder";
  EXPECT_EQ(CodeOf([&] { PolicyModel::FromCheckpoint(other); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace geodex
