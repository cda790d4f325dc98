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

#include "geodex/harness.h"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "geodex/checkpoint.h"
#include "geodex/error.h"

namespace geodex {

namespace {

// Stream tags for DeriveSeed; every stochastic stage draws from its own.
constexpr std::uint64_t kInitTag = 101;
constexpr std::uint64_t kRolloutTag = 102;
constexpr std::uint64_t kUpdateTag = 103;
constexpr std::uint64_t kEvalTrainTag = 104;
constexpr std::uint64_t kEvalHeldoutTag = 105;
constexpr std::uint64_t kSplitTag = 106;

int WorkerCount(int requested) {
  return requested > 0 ? requested : std::max(1, omp_get_max_threads());
}

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Raw policy inputs for a set of observations; geometry-aware rows carry
// the encoder feature of each observation's paired clouds.
Matrix PolicyInputs(const PolicyModel& model, const EncoderModel* encoder,
                    const std::vector<Observation>& obs) {
  const int rows = static_cast<int>(obs.size());
  Matrix inputs(rows, model.input_width());
  Matrix features;
  if (model.mode == PolicyMode::kGeometryAware) {
    std::vector<CloudPair> pairs;
    for (const Observation& o : obs) pairs.push_back({&*o.current_cloud, &*o.goal_cloud});
    features = PointNetEncode(*encoder, pairs).features;
  }
  for (int r = 0; r < rows; ++r) {
    const auto flat = obs[r].Flat();
    std::span<const double> feature;
    if (features.size() > 0) feature = {features.row(r).data(), features.row(r).data() + features.cols()};
    WritePolicyInput(flat, obs[r].goal, feature,
                     std::span<double>(inputs.row(r).data(), inputs.cols()));
  }
  return inputs;
}

struct EpisodeBatch {
  std::vector<Episode> episodes;
  std::vector<int> final_rewards;
};

struct RolloutSpec {
  int object_id = 0;
  GoalMode goal_mode = GoalMode::kZAxis;
  std::vector<std::uint64_t> seeds;  // one per episode
  bool goal_is_initial = false;
  bool record = false;
  // Exploration; epsilon = 1 with a null model gives random actions.
  bool explore = false;
  double epsilon = 0.0;
  double sigma = 0.0;
};

// Runs the episodes of one object in lockstep so that the actor and the
// encoder see whole batches. Every episode owns its engine.
EpisodeBatch RunEpisodes(const Env& env, const PolicyModel* model, const EncoderModel* encoder,
                         const RolloutSpec& spec) {
  const int n = static_cast<int>(spec.seeds.size());
  const bool clouds = model != nullptr && model->mode == PolicyMode::kGeometryAware;
  std::vector<Rng> rngs;
  std::vector<EnvState> states;
  std::vector<Observation> obs;
  for (int k = 0; k < n; ++k) {
    rngs.emplace_back(spec.seeds[k]);
    states.push_back(env.Reset(spec.object_id, spec.goal_mode, rngs[k]));
    if (spec.goal_is_initial) states[k].goal = states[k].orientation;
    obs.push_back(env.Observe(states[k], clouds, rngs[k]));
  }
  EpisodeBatch out;
  out.episodes.resize(spec.record ? n : 0);
  out.final_rewards.assign(n, 0);
  const int length = env.config().episode_length;
  for (int t = 0; t < length; ++t) {
    Matrix actions = Matrix::Zero(n, kActionDim);
    if (model != nullptr) actions = ActBatch(*model, PolicyInputs(*model, encoder, obs));
    for (int k = 0; k < n; ++k) {
      Action action;
      for (int i = 0; i < kActionDim; ++i) action[i] = actions(k, i);
      if (spec.explore) action = ExploreAction(action, rngs[k], spec.epsilon, spec.sigma);
      const StepResult step = env.Step(states[k], action);
      Observation next = env.Observe(step.state, clouds, rngs[k]);
      if (spec.record) {
        Transition tr;
        tr.object_id = spec.object_id;
        tr.step = t;
        tr.obs = obs[k].Flat();
        tr.next_obs = next.Flat();
        tr.action = action;
        tr.achieved = step.state.orientation;
        tr.goal = states[k].goal;
        tr.reward = step.reward;
        tr.done = step.done;
        tr.cloud_seed = obs[k].cloud_seed;
        tr.next_cloud_seed = next.cloud_seed;
        out.episodes[k].push_back(tr);
      }
      if (t + 1 == length) out.final_rewards[k] = step.reward;
      states[k] = step.state;
      obs[k] = std::move(next);
    }
  }
  return out;
}

std::vector<double> EvaluateImpl(const Env& env, const PolicyModel* model,
                                 const EncoderModel* encoder, const std::vector<int>& object_ids,
                                 GoalMode goal_mode, const EvalOptions& options) {
  if (options.episodes < 1) throw Error(ErrorCode::kConfig, "eval episodes must be >= 1");
  const int count = static_cast<int>(object_ids.size());
  std::vector<double> success(count, 0.0);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic) num_threads(WorkerCount(options.workers))
  for (int j = 0; j < count; ++j) {
    try {
      RolloutSpec spec;
      spec.object_id = object_ids[j];
      spec.goal_mode = goal_mode;
      spec.goal_is_initial = options.goal_is_initial;
      for (int e = 0; e < options.episodes; ++e) {
        spec.seeds.push_back(DeriveSeed(options.seed, object_ids[j], e));
      }
      if (model == nullptr) {
        spec.explore = true;
        spec.epsilon = 1.0;
      }
      const EpisodeBatch batch = RunEpisodes(env, model, encoder, spec);
      success[j] = std::accumulate(batch.final_rewards.begin(), batch.final_rewards.end(), 0.0) /
                   options.episodes;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return success;
}

nlohmann::json WithoutVolatile(nlohmann::json j) {
  j.erase("workers");
  return j;
}

std::uint64_t Fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void AppendLines(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  for (const MetricRow& row : rows) out << row.ToJson().dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

std::string MetricsText(const std::vector<MetricRow>& rows) {
  std::string text;
  for (const MetricRow& row : rows) text += row.ToJson().dump() + "\n";
  return text;
}

void ValidateRunConfig(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, "run: " + what); };
  ValidateEnvConfig(c.env);
  ValidateAgentConfig(c.agent);
  ValidateReplayConfig(c.replay);
  if (c.epochs < 1) fail("epochs must be >= 1");
  if (c.cycles < 1) fail("cycles must be >= 1");
  if (c.rollouts < 1 || c.rollouts % c.cycles != 0) {
    fail("rollouts must be a positive multiple of cycles");
  }
  if (c.updates < 0 || c.updates % c.cycles != 0) {
    fail("updates must be a non-negative multiple of cycles");
  }
  if (c.eval_episodes < 1) fail("eval_episodes must be >= 1");
  if (c.workers < 0) fail("workers must be >= 0");
  if (c.mode == PolicyMode::kVanilla && c.agent.finetune_encoder) {
    fail("finetune_encoder needs the geometry-aware mode");
  }
}

nlohmann::json EnvConfigToJson(const EnvConfig& c) {
  return {{"tau_max", c.tau_max},
          {"damping", c.damping},
          {"mass", c.mass},
          {"episode_length", c.episode_length},
          {"dt", c.dt},
          {"position_noise_variance", c.position_noise_variance},
          {"success_threshold", c.success_threshold},
          {"cloud_points", c.cloud_points},
          {"torque_map_seed", c.torque_map_seed},
          {"rest_position", c.rest_position}};
}

EnvConfig EnvConfigFromJson(const nlohmann::json& j) {
  EnvConfig c;
  try {
    c.tau_max = j.value("tau_max", c.tau_max);
    c.damping = j.value("damping", c.damping);
    c.mass = j.value("mass", c.mass);
    c.episode_length = j.value("episode_length", c.episode_length);
    c.dt = j.value("dt", c.dt);
    c.position_noise_variance = j.value("position_noise_variance", c.position_noise_variance);
    c.success_threshold = j.value("success_threshold", c.success_threshold);
    c.cloud_points = j.value("cloud_points", c.cloud_points);
    c.torque_map_seed = j.value("torque_map_seed", c.torque_map_seed);
    c.rest_position = j.value("rest_position", c.rest_position);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("env config: ") + e.what());
  }
  return c;
}

nlohmann::json RunConfigToJson(const RunConfig& c) {
  return {{"mode", PolicyModeName(c.mode)},
          {"registry", c.registry},
          {"train_objects", c.train_objects},
          {"heldout_objects", c.heldout_objects},
          {"goal_mode", GoalModeName(c.goal_mode)},
          {"epochs", c.epochs},
          {"cycles", c.cycles},
          {"rollouts", c.rollouts},
          {"updates", c.updates},
          {"eval_episodes", c.eval_episodes},
          {"seed", c.seed},
          {"encoder_path", c.encoder_path},
          {"workers", c.workers},
          {"env", EnvConfigToJson(c.env)},
          {"agent", AgentConfigToJson(c.agent)},
          {"replay",
           {{"capacity", c.replay.capacity},
            {"relabel_k", c.replay.relabel_k},
            {"success_threshold", c.replay.success_threshold}}}};
}

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  RunConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "run config must be a JSON object");
  static const std::vector<std::string> kKeys = {
      "mode",   "registry", "train_objects", "heldout_objects", "goal_mode",
      "epochs", "cycles",   "rollouts",      "updates",         "eval_episodes",
      "seed",   "encoder_path", "workers",   "env",             "agent",
      "replay", "config_hash"};
  for (const auto& item : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end()) {
      throw Error(ErrorCode::kConfig, "unknown config key '" + item.key() + "'");
    }
  }
  try {
    if (j.contains("mode")) c.mode = PolicyModeFromName(j["mode"].get<std::string>());
    c.registry = j.value("registry", c.registry);
    c.train_objects = j.value("train_objects", c.train_objects);
    c.heldout_objects = j.value("heldout_objects", c.heldout_objects);
    if (j.contains("goal_mode")) c.goal_mode = GoalModeFromName(j["goal_mode"].get<std::string>());
    c.epochs = j.value("epochs", c.epochs);
    c.cycles = j.value("cycles", c.cycles);
    c.rollouts = j.value("rollouts", c.rollouts);
    c.updates = j.value("updates", c.updates);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    c.seed = j.value("seed", c.seed);
    c.encoder_path = j.value("encoder_path", c.encoder_path);
    c.workers = j.value("workers", c.workers);
    if (j.contains("env")) c.env = EnvConfigFromJson(j["env"]);
    if (j.contains("agent")) c.agent = AgentConfigFromJson(j["agent"]);
    if (j.contains("replay")) {
      const auto& r = j["replay"];
      c.replay.capacity = r.value("capacity", c.replay.capacity);
      c.replay.relabel_k = r.value("relabel_k", c.replay.relabel_k);
      c.replay.success_threshold = r.value("success_threshold", c.replay.success_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("run config: ") + e.what());
  }
  return c;
}

std::string ConfigHash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    Fnv1a(WithoutVolatile(RunConfigToJson(config)).dump())));
  return buf;
}

nlohmann::json MetricRow::ToJson() const {
  nlohmann::json j = {{"epoch", epoch},     {"object", object},   {"phase", phase},
                      {"success", success}, {"samples", samples}};
  if (actor_loss && critic_loss) {
    j["losses"] = {{"actor", *actor_loss}, {"critic", *critic_loss}};
  } else {
    j["losses"] = nullptr;
  }
  return j;
}

MetricRow MetricRow::FromJson(const nlohmann::json& j) {
  MetricRow row;
  try {
    row.epoch = j.at("epoch").get<int>();
    row.object = j.at("object").get<std::string>();
    row.phase = j.at("phase").get<std::string>();
    row.success = j.at("success").get<double>();
    row.samples = j.at("samples").get<std::uint64_t>();
    if (j.contains("losses") && !j["losses"].is_null()) {
      row.actor_loss = j["losses"].at("actor").get<double>();
      row.critic_loss = j["losses"].at("critic").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("metrics row: ") + e.what());
  }
  return row;
}

double RunResult::MeanTrainSuccess() const { return Mean(final_train_success); }
double RunResult::MeanHeldoutSuccess() const { return Mean(final_heldout_success); }

std::vector<double> Evaluate(const PolicyModel& model, const EncoderModel* encoder,
                             const Env& env, const std::vector<int>& object_ids,
                             GoalMode goal_mode, const EvalOptions& options) {
  if ((model.mode == PolicyMode::kGeometryAware) != (encoder != nullptr)) {
    throw Error(ErrorCode::kModeMismatch,
                "an encoder is required exactly for geometry-aware policies");
  }
  if (encoder != nullptr && encoder->feature_width() != model.feature_width) {
    throw Error(ErrorCode::kShapeMismatch, "encoder feature width differs from the policy");
  }
  return EvaluateImpl(env, &model, encoder, object_ids, goal_mode, options);
}

std::vector<double> EvaluateRandom(const Env& env, const std::vector<int>& object_ids,
                                   GoalMode goal_mode, const EvalOptions& options) {
  return EvaluateImpl(env, nullptr, nullptr, object_ids, goal_mode, options);
}

void PrepareRunDir(const std::filesystem::path& run_dir, const nlohmann::json& config) {
  std::filesystem::create_directories(run_dir / "checkpoints");
  WriteFileBytes(run_dir / "config.json", config.dump(2) + "\n");
  for (const char* name : {"metrics.jsonl", "report.csv"}) {
    if (!std::filesystem::exists(run_dir / name)) WriteFileBytes(run_dir / name, "");
  }
}

RunResult Train(const RunConfig& config, const ObjectSet& objects, const EncoderModel* encoder,
                const TrainOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  ValidateRunConfig(config);
  const bool geometric = config.mode == PolicyMode::kGeometryAware;
  if (objects.train.empty()) throw Error(ErrorCode::kConfig, "run: no training objects");
  if (geometric != (encoder != nullptr)) {
    throw Error(ErrorCode::kConfig, "run: an encoder is required exactly in geometry-aware mode");
  }
  if (geometric && !config.agent.finetune_encoder && !encoder->frozen) {
    throw Error(ErrorCode::kNotFrozen, "run: the encoder checkpoint is not frozen");
  }
  const int n = static_cast<int>(objects.train.size());
  std::vector<ObjectRecord> all = objects.train;
  all.insert(all.end(), objects.heldout.begin(), objects.heldout.end());
  const Env env(config.env, all);
  std::vector<int> train_ids(n), heldout_ids(objects.heldout.size());
  std::iota(train_ids.begin(), train_ids.end(), 0);
  std::iota(heldout_ids.begin(), heldout_ids.end(), n);

  Rng init_rng(DeriveSeed(config.seed, kInitTag));
  PolicyModel model = PolicyModel::Create(config.mode, config.agent, init_rng,
                                          geometric ? encoder->feature_width() : kFeatureWidth);
  ReplayConfig replay_config = config.replay;
  replay_config.success_threshold = config.env.success_threshold;
  std::optional<EpisodeBuffer> buffer(std::in_place, replay_config, n);

  // Fine-tuning trains a private copy; otherwise the caller's frozen encoder
  // is only read.
  std::optional<EncoderModel> tuned;
  AdamState tuned_adam;
  if (geometric && config.agent.finetune_encoder) {
    tuned = *encoder;
    tuned->frozen = false;
    tuned_adam = AdamState::Zeros(tuned->param_count(), {.lr = config.agent.encoder_lr});
  }
  const EncoderModel* features = tuned ? &*tuned : encoder;

  nlohmann::json config_json = RunConfigToJson(config);
  config_json["config_hash"] = ConfigHash(config);
  const std::filesystem::path& dir = options.run_dir;
  const bool persist = !dir.empty();
  const auto ckpt_dir = dir / "checkpoints";

  RunResult result;
  int start_epoch = 0;
  if (persist && options.resume) {
    const auto state = nlohmann::json::parse(ReadFileBytes(ckpt_dir / "state.json"));
    nlohmann::json saved = WithoutVolatile(state.at("config"));
    nlohmann::json now = WithoutVolatile(RunConfigToJson(config));
    saved.erase("epochs");
    now.erase("epochs");
    if (saved != now) {
      throw Error(ErrorCode::kConfig, "resume: configuration differs from the checkpointed run");
    }
    start_epoch = state.at("epochs_done").get<int>();
    result.samples = state.at("samples").get<std::uint64_t>();
    model = PolicyModel::FromCheckpoint(ReadCheckpointFile(ckpt_dir / "agent.ckpt"));
    buffer.reset();
    buffer.emplace(EpisodeBuffer::FromCheckpoint(ReadCheckpointFile(ckpt_dir / "replay.ckpt")));
    if (tuned) {
      const Checkpoint enc = ReadCheckpointFile(ckpt_dir / "encoder_tuned.ckpt");
      tuned = EncoderModel::FromCheckpoint(enc);
      tuned->frozen = false;
      tuned_adam.m = enc.GetArray("adam_m");
      tuned_adam.v = enc.GetArray("adam_v");
      tuned_adam.step = static_cast<std::int64_t>(enc.GetArray("adam_step").at(0));
      features = &*tuned;
    }
    for (const MetricRow& row : ReadMetrics(dir)) {
      if (row.epoch < start_epoch) result.rows.push_back(row);
    }
    // Drop rows of a partially written epoch.
    WriteFileBytes(dir / "metrics.jsonl", MetricsText(result.rows));
    PrepareRunDir(dir, config_json);
  } else if (persist) {
    std::filesystem::remove(dir / "metrics.jsonl");
    PrepareRunDir(dir, config_json);
  }

  auto save_state = [&](int epochs_done) {
    WriteCheckpointFile(model.ToCheckpoint(), ckpt_dir / "agent.ckpt");
    WriteCheckpointFile(buffer->ToCheckpoint(), ckpt_dir / "replay.ckpt");
    if (tuned) {
      Checkpoint enc = tuned->ToCheckpoint();
      enc.arrays.push_back({"adam_m", tuned_adam.m});
      enc.arrays.push_back({"adam_v", tuned_adam.v});
      enc.arrays.push_back({"adam_step", {static_cast<double>(tuned_adam.step)}});
      WriteCheckpointFile(enc, ckpt_dir / "encoder_tuned.ckpt");
    }
    nlohmann::json state = {{"epochs_done", epochs_done},
                            {"samples", result.samples},
                            {"config", RunConfigToJson(config)}};
    WriteFileBytes(ckpt_dir / "state.json", state.dump(2) + "\n");
  };

  const int workers = WorkerCount(config.workers);
  const int length = config.env.episode_length;
  const int per_cycle_rollouts = config.rollouts / config.cycles;
  const int per_cycle_updates = config.updates / config.cycles;
  const EncoderTuning tuning = tuned ? EncoderTuning{&*tuned, &tuned_adam} : EncoderTuning{};

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    std::vector<int> successes(n, 0);
    std::vector<double> actor_loss(n, 0.0), critic_loss(n, 0.0);
    for (int cycle = 0; cycle < config.cycles; ++cycle) {
      const std::uint64_t slot = static_cast<std::uint64_t>(epoch) * config.cycles + cycle;
      std::vector<EpisodeBatch> collected(n);
      std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
      for (int i = 0; i < n; ++i) {
        try {
          RolloutSpec spec;
          spec.object_id = i;
          spec.goal_mode = config.goal_mode;
          spec.record = true;
          spec.explore = true;
          spec.epsilon = config.agent.epsilon;
          spec.sigma = config.agent.sigma;
          for (int r = 0; r < per_cycle_rollouts; ++r) {
            spec.seeds.push_back(
                DeriveSeed(config.seed, kRolloutTag, (slot * n + i) * per_cycle_rollouts + r));
          }
          collected[i] = RunEpisodes(env, &model, features, spec);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (int i = 0; i < n; ++i) {
        for (Episode& episode : collected[i].episodes) buffer->Insert(std::move(episode));
        for (int reward : collected[i].final_rewards) successes[i] += reward;
        result.samples += static_cast<std::uint64_t>(per_cycle_rollouts) * length;
      }

      for (int u = 0; u < per_cycle_updates; ++u) {
        const std::uint64_t update_slot = slot * per_cycle_updates + u;
        std::vector<UpdateBatch> batches(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (int i = 0; i < n; ++i) {
          try {
            Rng rng(DeriveSeed(config.seed, kUpdateTag, update_slot * n + i));
            const auto samples = buffer->SampleObject(i, config.agent.batch, rng);
            batches[i] = MakeUpdateBatch(env, features, config.mode, samples, tuned.has_value());
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
        for (const auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
        const UpdateLosses losses = MultiTaskUpdate(model, batches, tuning);
        for (int i = 0; i < n; ++i) {
          actor_loss[i] += losses.per_object_actor[i];
          critic_loss[i] += losses.per_object_critic[i];
        }
      }
      UpdateTargets(model);
    }

    EvalOptions eval;
    eval.episodes = config.eval_episodes;
    eval.workers = workers;
    eval.seed = DeriveSeed(config.seed, kEvalTrainTag, epoch);
    const std::vector<double> train_eval =
        Evaluate(model, features, env, train_ids, config.goal_mode, eval);
    std::vector<double> heldout_eval;
    if (!heldout_ids.empty()) {
      eval.seed = DeriveSeed(config.seed, kEvalHeldoutTag, epoch);
      heldout_eval = Evaluate(model, features, env, heldout_ids, config.goal_mode, eval);
    }

    std::vector<MetricRow> rows;
    const double updates = std::max(1, config.updates);
    for (int i = 0; i < n; ++i) {
      MetricRow row;
      row.epoch = epoch;
      row.object = objects.train[i].name;
      row.phase = "train";
      row.success = successes[i] / static_cast<double>(config.rollouts);
      row.samples = result.samples;
      if (config.updates > 0) {
        row.actor_loss = actor_loss[i] / updates;
        row.critic_loss = critic_loss[i] / updates;
      }
      rows.push_back(row);
    }
    for (int i = 0; i < n; ++i) {
      rows.push_back({epoch, objects.train[i].name, "eval-train", train_eval[i], result.samples,
                      std::nullopt, std::nullopt});
    }
    for (std::size_t h = 0; h < heldout_eval.size(); ++h) {
      rows.push_back({epoch, objects.heldout[h].name, "eval-heldout", heldout_eval[h],
                      result.samples, std::nullopt, std::nullopt});
    }
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    result.final_train_success = train_eval;
    result.final_heldout_success = heldout_eval;
    if (persist) {
      AppendLines(dir / "metrics.jsonl", rows);
      const bool last = epoch + 1 == config.epochs;
      const bool stopping = epoch + 1 == options.stop_after_epoch;
      if (last || stopping || (options.checkpoint_every > 0 &&
                               (epoch + 1) % options.checkpoint_every == 0)) {
        save_state(epoch + 1);
      }
    }
    if (epoch + 1 == options.stop_after_epoch) break;
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (persist) {
    WriteFileBytes(dir / "report.csv", ReportCsv(ReadMetrics(dir)));
    WriteFileBytes(dir / "timing.json",
                   nlohmann::json{{"wall_seconds", result.wall_seconds}}.dump() + "\n");
  }
  return result;
}

Split SplitByScores(const std::vector<double>& scores, double ratio, Rng& rng) {
  const int n = static_cast<int>(scores.size());
  if (n < 4) throw Error(ErrorCode::kTooFewObjects, "a split needs at least four objects");
  if (!(ratio > 0 && ratio < 1)) throw Error(ErrorCode::kConfig, "split ratio must be in (0, 1)");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  const int k = std::clamp(static_cast<int>(std::lround(ratio * n)), 1, n - 1);
  std::vector<bool> is_test(n, false);
  for (int j = 0; j < k; ++j) {
    is_test[static_cast<int>(std::floor((j + 0.5) * n / k))] = true;
  }
  Split split;
  std::vector<double> train_scores, test_scores;
  for (int rank = 0; rank < n; ++rank) {
    const int index = order[rank];
    if (is_test[rank]) {
      split.test.push_back(index);
      test_scores.push_back(scores[index]);
    } else {
      split.train.push_back(index);
      train_scores.push_back(scores[index]);
    }
  }
  split.train_mean = Mean(train_scores);
  split.test_mean = Mean(test_scores);
  return split;
}

std::vector<double> ProbeScores(const RunConfig& probe_config,
                                const std::vector<ObjectRecord>& objects) {
  std::vector<double> scores;
  for (const ObjectRecord& object : objects) {
    RunConfig config = probe_config;
    config.mode = PolicyMode::kVanilla;
    config.agent.finetune_encoder = false;
    config.train_objects = {object.name};
    config.heldout_objects.clear();
    scores.push_back(Train(config, {{object}, {}}, nullptr).MeanTrainSuccess());
  }
  return scores;
}

ObjectSplit SplitObjects(const RunConfig& probe_config, const std::vector<ObjectRecord>& objects,
                         double ratio) {
  if (objects.size() < 4) {
    throw Error(ErrorCode::kTooFewObjects, "a split needs at least four objects");
  }
  if (!(ratio > 0 && ratio < 1)) throw Error(ErrorCode::kConfig, "split ratio must be in (0, 1)");
  ObjectSplit result;
  result.scores = ProbeScores(probe_config, objects);
  Rng rng(DeriveSeed(probe_config.seed, kSplitTag));
  result.split = SplitByScores(result.scores, ratio, rng);
  return result;
}

std::vector<SweepRow> ScalingSweep(const RunConfig& base, const ObjectSet& objects,
                                   const std::vector<int>& counts,
                                   const std::vector<PolicyMode>& modes,
                                   const std::vector<std::uint64_t>& seeds,
                                   const EncoderModel* encoder,
                                   const std::filesystem::path& runs_dir) {
  for (int count : counts) {
    if (count < 1 || count > static_cast<int>(objects.train.size())) {
      throw Error(ErrorCode::kConfig, "sweep count " + std::to_string(count) +
                                          " exceeds the available training objects");
    }
  }
  std::vector<SweepRow> rows;
  for (int count : counts) {
    ObjectSet subset;
    subset.train.assign(objects.train.begin(), objects.train.begin() + count);
    subset.heldout = objects.heldout;
    for (PolicyMode mode : modes) {
      for (std::uint64_t seed : seeds) {
        RunConfig config = base;
        config.mode = mode;
        config.seed = seed;
        config.train_objects.clear();
        for (const ObjectRecord& o : subset.train) config.train_objects.push_back(o.name);
        config.heldout_objects.clear();
        for (const ObjectRecord& o : subset.heldout) config.heldout_objects.push_back(o.name);
        if (mode == PolicyMode::kVanilla) config.agent.finetune_encoder = false;
        TrainOptions options;
        if (!runs_dir.empty()) options.run_dir = runs_dir / SweepRunName(count, mode, seed);
        const RunResult run = Train(
            config, subset, mode == PolicyMode::kGeometryAware ? encoder : nullptr, options);
        rows.push_back({count, mode, seed, run.MeanTrainSuccess(), run.MeanHeldoutSuccess()});
      }
    }
  }
  return rows;
}

std::string SweepRunName(int count, PolicyMode mode, std::uint64_t seed) {
  return "count" + std::to_string(count) + "-" + std::string(PolicyModeName(mode)) + "-seed" +
         std::to_string(seed);
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string csv = "count,mode,seed,train_success,heldout_success\n";
  for (const SweepRow& row : rows) {
    csv += std::to_string(row.count) + "," + std::string(PolicyModeName(row.mode)) + "," +
           std::to_string(row.seed) + "," + FormatDouble(row.train_success) + "," +
           FormatDouble(row.heldout_success) + "\n";
  }
  return csv;
}

std::vector<MetricRow> ReadMetrics(const std::filesystem::path& run_dir) {
  std::istringstream in(ReadFileBytes(run_dir / "metrics.jsonl"));
  std::vector<MetricRow> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      rows.push_back(MetricRow::FromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat,
                  "metrics.jsonl line " + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

std::string ReportCsv(const std::vector<MetricRow>& rows) {
  std::string csv = "epoch,object,phase,success,samples,actor_loss,critic_loss\n";
  for (const MetricRow& row : rows) {
    csv += std::to_string(row.epoch) + "," + row.object + "," + row.phase + "," +
           FormatDouble(row.success) + "," + std::to_string(row.samples) + "," +
           (row.actor_loss ? FormatDouble(*row.actor_loss) : "") + "," +
           (row.critic_loss ? FormatDouble(*row.critic_loss) : "") + "\n";
  }
  return csv;
}

void WriteReport(const std::filesystem::path& run_dir, const std::filesystem::path& out) {
  WriteFileBytes(out, ReportCsv(ReadMetrics(run_dir)));
}

}  // namespace geodex
