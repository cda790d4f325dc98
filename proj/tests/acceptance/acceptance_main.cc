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

// Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
// value next to its pinned tolerance, then exits nonzero if any line failed.
//
// Long training runs are written as ordinary run directories under the work
// directory. A run whose directory already holds a complete run with the same
// config hash is read back instead of retrained; runs are deterministic, so
// the numbers are the same either way. Pass --fresh to wipe the work
// directory first.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "geodex/agent.h"
#include "geodex/checkpoint.h"
#include "geodex/encoder.h"
#include "geodex/env.h"
#include "geodex/error.h"
#include "geodex/harness.h"
#include "geodex/mesh.h"
#include "geodex/nn.h"
#include "geodex/registry.h"
#include "geodex/rotmath.h"

namespace geodex {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// ---- pinned tolerances and budgets ----------------------------------------

constexpr double kLossIdentityTol = 1e-6;
constexpr double kLossIdentitySeconds = 1.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradSeconds = 30.0;
constexpr double kPretrainAccuracy = 0.95;
constexpr double kPretrainRotErr = 0.2;
constexpr double kHerSuccess = 0.7;
constexpr double kHerMargin = 0.2;
constexpr double kParityTol = 0.10;
constexpr double kFinetuneSlack = 0.05;
constexpr double kScalingSlack = 0.05;
constexpr double kEnergyTol = 1e-3;
constexpr double kInertiaTol = 1e-9;
constexpr double kIdentityRotation = 0.05;  // informational

const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

// Desk-scale RL budget shared by every training run below.
RunConfig DeskConfig() {
  RunConfig c;
  c.epochs = 50;
  c.cycles = 10;
  c.rollouts = 20;
  c.updates = 400;
  c.eval_episodes = 20;
  c.agent.batch = 64;
  c.agent.hidden = {64, 64, 64};
  c.agent.actor_lr = 2e-3;
  c.agent.critic_lr = 2e-3;
  c.registry = "<presets>";
  return c;
}

// Multi-task comparisons (criteria 5 to 8).
RunConfig MultiConfig() {
  RunConfig c = DeskConfig();
  c.updates = 200;
  c.env.cloud_points = 8;
  return c;
}

const std::vector<std::string> kTrainPool = {"cube",   "bar",  "disk",    "rod",
                                             "sphere", "puck", "pinched", "plate"};
const std::vector<std::string> kFourObjects = {"cube", "bar", "disk", "rod"};
const std::string kHighAspect = "spindle";
const std::string kNearSpherical = "pebble";

// ---- reporting -------------------------------------------------------------

struct Outcome {
  int criterion;
  bool pass;
};
std::vector<Outcome> outcomes;

void Line(int criterion, bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  criterion %2d  %-32s %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  outcomes.push_back({criterion, pass});
}

void Info(const std::string& text) {
  std::printf("INFO  %s\n", text.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string List(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += Fmt(i ? " %.3f" : "%.3f", v[i]);
  return s + "]";
}

// ---- objects and cached runs -----------------------------------------------

ObjectRecord Preset(const std::string& name) {
  for (const NamedShape& s : PresetShapes("all")) {
    if (s.name == name) return MakeProceduralRecord(s);
  }
  throw Error(ErrorCode::kUnknownObject, name);
}

std::vector<ObjectRecord> Presets(const std::vector<std::string>& names) {
  std::vector<ObjectRecord> out;
  for (const std::string& n : names) out.push_back(Preset(n));
  return out;
}

struct Summary {
  std::vector<double> train;    // final per-object success, training objects
  std::vector<double> heldout;  // same for held-out objects
  double MeanTrain() const {
    double s = 0;
    for (double v : train) s += v;
    return train.empty() ? 0 : s / train.size();
  }
};

std::optional<Summary> ReadFinished(const fs::path& dir, const RunConfig& config) {
  try {
    if (!fs::exists(dir / "checkpoints" / "state.json")) return std::nullopt;
    const auto saved = nlohmann::json::parse(ReadFileBytes(dir / "config.json"));
    if (saved.value("config_hash", std::string()) != ConfigHash(config)) return std::nullopt;
    const auto state = nlohmann::json::parse(ReadFileBytes(dir / "checkpoints" / "state.json"));
    if (state.at("epochs_done").get<int>() != config.epochs) return std::nullopt;
    Summary s;
    for (const MetricRow& row : ReadMetrics(dir)) {
      if (row.epoch != config.epochs - 1) continue;
      if (row.phase == "eval-train") s.train.push_back(row.success);
      if (row.phase == "eval-heldout") s.heldout.push_back(row.success);
    }
    if (s.train.size() != config.train_objects.size()) return std::nullopt;
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int reused_runs = 0;
int trained_runs = 0;

Summary RunOrReuse(const fs::path& dir, RunConfig config, const EncoderModel* encoder) {
  ObjectSet objects{Presets(config.train_objects), Presets(config.heldout_objects)};
  if (const auto done = ReadFinished(dir, config)) {
    ++reused_runs;
    return *done;
  }
  const auto start = Clock::now();
  TrainOptions options;
  options.run_dir = dir;
  const RunResult r = Train(config, objects, encoder, options);
  ++trained_runs;
  Info(Fmt("trained %s in %.0f s", dir.filename().c_str(), Seconds(start)));
  return {r.final_train_success, r.final_heldout_success};
}

// ---- criterion 1 -------------------------------------------------------------

void RotationLossIdentity() {
  const auto start = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const UnitQuaternion a = RandomRotationSO3(rng);
    const UnitQuaternion b = RandomRotationSO3(rng);
    const double loss = RotationLoss(QuatToMatrix(a).matrix(), QuatToMatrix(b)).loss;
    worst = std::max(worst, std::abs(loss - GeodesicAngle(a, b)));
  }
  const double secs = Seconds(start);
  Line(1, worst <= kLossIdentityTol && secs < kLossIdentitySeconds, "rotation-loss identity",
       Fmt("max |loss - angle| = %.2e (tol %.0e) over 1e4 pairs, %.3f s (limit %.0f s)", worst,
           kLossIdentityTol, secs, kLossIdentitySeconds));
}

// ---- criterion 2 -------------------------------------------------------------

void GradientIntegrity() {
  const auto start = Clock::now();
  Rng rng(2002);
  GradCheckOptions opts;
  opts.samples = 300;

  // Encoder composite loss, trunk widths <= 32, 8 points per cloud.
  std::vector<Mesh> meshes;
  for (const char* n : {"cube", "bar", "disk", "rod"}) meshes.push_back(Preset(n).mesh);
  const EncoderModel encoder = EncoderModel::Create(4, rng, {16, 32, 32});
  const PretrainBatch batch = MakePretrainBatch(meshes, {4, 8, false}, rng);
  const double enc_err = GradCheck(
      [&](std::span<const double> p, std::vector<double>* grad) {
        EncoderModel m = encoder;
        m.SetFlatParams(p);
        EncoderLoss out = ComputeEncoderLoss(m, batch, 1.0, grad != nullptr);
        if (grad != nullptr) *grad = std::move(out.grad);
        return out.metrics.l_e;
      },
      encoder.FlatParams(), rng, opts);

  // Actor and critic on a warm normalizer and random transitions.
  AgentConfig config;
  config.hidden = {32, 32};
  PolicyModel model = PolicyModel::Create(PolicyMode::kGeometryAware, config, rng, 32);
  Matrix warm(64, model.input_width());
  for (Eigen::Index i = 0; i < warm.size(); ++i) warm.data()[i] = Uniform(rng, -2, 3);
  model.normalizer.Update(warm);
  UpdateBatch b;
  b.mode = model.mode;
  b.inputs.resize(6, model.input_width());
  b.next_inputs.resize(6, model.input_width());
  b.actions.resize(6, kActionDim);
  for (Eigen::Index i = 0; i < b.inputs.size(); ++i) {
    b.inputs.data()[i] = Uniform(rng, -1, 1);
    b.next_inputs.data()[i] = Uniform(rng, -1, 1);
  }
  for (Eigen::Index i = 0; i < b.actions.size(); ++i) b.actions.data()[i] = Uniform(rng, -1, 1);
  for (int r = 0; r < 6; ++r) {
    b.rewards.push_back(r % 3 == 0 ? 1.0 : 0.0);
    b.dones.push_back(r % 4 == 0 ? 1.0 : 0.0);
  }
  const double actor_err = GradCheck(
      [&](std::span<const double> p, std::vector<double>* grad) {
        PolicyModel m = model;
        std::copy(p.begin(), p.end(), m.actor.params().begin());
        AgentGradients g = ComputeAgentGradients(m, b);
        if (grad != nullptr) *grad = g.actor;
        return g.actor_loss;
      },
      model.actor.params(), rng, opts);
  const double critic_err = GradCheck(
      [&](std::span<const double> p, std::vector<double>* grad) {
        PolicyModel m = model;
        std::copy(p.begin(), p.end(), m.critic.params().begin());
        AgentGradients g = ComputeAgentGradients(m, b);
        if (grad != nullptr) *grad = g.critic;
        return g.critic_loss;
      },
      model.critic.params(), rng, opts);
  const double secs = Seconds(start);
  const double worst = std::max({enc_err, actor_err, critic_err});
  Line(2, worst < kGradRelTol && secs < kGradSeconds, "gradient integrity",
       Fmt("max rel err encoder %.1e, actor %.1e, critic %.1e (tol %.0e), %.1f s (limit %.0f s)",
           enc_err, actor_err, critic_err, kGradRelTol, secs, kGradSeconds));
}

// ---- criterion 3 -------------------------------------------------------------

struct Pretrained {
  EncoderModel model;
  fs::path path;
  PretrainMetrics validation;
};

std::vector<Mesh> PretrainMeshes() {
  std::vector<Mesh> meshes;
  for (const NamedShape& s : PresetShapes("basic8")) meshes.push_back(MakeProceduralRecord(s).mesh);
  return meshes;
}

Pretrained PretrainOrReuse(const fs::path& work, std::uint64_t seed) {
  PretrainConfig config;  // defaults: 5000 steps, batch 32, 128 points
  config.seed = seed;
  config.log_every = 0;
  const fs::path dir = work / ("pretrain-seed" + std::to_string(seed));
  const fs::path ckpt = dir / "checkpoints" / "encoder.ckpt";
  const fs::path meta = dir / "validation.json";
  const std::string key = nlohmann::json{{"steps", config.steps},
                                         {"batch", config.batch},
                                         {"points", config.points},
                                         {"lr", config.lr},
                                         {"trunk", config.trunk_widths},
                                         {"seed", seed}}
                              .dump();
  if (fs::exists(ckpt) && fs::exists(meta)) {
    const auto j = nlohmann::json::parse(ReadFileBytes(meta));
    if (j.value("key", std::string()) == key) {
      ++reused_runs;
      PretrainMetrics v;
      v.accuracy = j.at("accuracy");
      v.rot_err = j.at("rot_err");
      return {EncoderModel::FromCheckpoint(ReadCheckpointFile(ckpt)), ckpt, v};
    }
  }
  const auto start = Clock::now();
  const std::vector<Mesh> meshes = PretrainMeshes();
  const PretrainResult r = Pretrain(meshes, config);
  fs::create_directories(ckpt.parent_path());
  WriteCheckpointFile(r.model.ToCheckpoint(), ckpt);
  WriteFileBytes(meta, nlohmann::json{{"key", key},
                                      {"accuracy", r.validation.accuracy},
                                      {"rot_err", r.validation.rot_err}}
                           .dump(2));
  ++trained_runs;
  Info(Fmt("pretrained seed %llu in %.0f s", static_cast<unsigned long long>(seed),
           Seconds(start)));
  return {r.model, ckpt, r.validation};
}

// Returns the encoder of the median-accuracy seed for the RL criteria.
Pretrained EncoderPretraining(const fs::path& work) {
  std::vector<Pretrained> runs;
  std::vector<double> acc, err;
  for (std::uint64_t s : kSeeds) {
    runs.push_back(PretrainOrReuse(work, s));
    acc.push_back(runs.back().validation.accuracy);
    err.push_back(runs.back().validation.rot_err);
  }
  const double med_acc = Median(acc), med_err = Median(err);
  Line(3, med_acc >= kPretrainAccuracy && med_err < kPretrainRotErr, "encoder pretraining",
       Fmt("median accuracy %.4f (>= %.2f) %s, median rotation error %.4f rad (< %.1f) %s",
           med_acc, kPretrainAccuracy, List(acc).c_str(), med_err, kPretrainRotErr,
           List(err).c_str()));

  std::size_t pick = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (acc[i] == med_acc) pick = i;
  }
  // Goal cloud equal to the current cloud should predict the identity.
  const std::vector<Mesh> meshes = PretrainMeshes();
  Rng rng(3003);
  const PretrainBatch batch = MakePretrainBatch(meshes, {64, 128, true}, rng);
  std::vector<CloudPair> pairs;
  for (const PretrainItem& item : batch.items) pairs.push_back({&item.current, &item.goal});
  const EncodeResult out = PointNetEncode(runs[pick].model, pairs);
  double worst = 0.0, sum = 0.0;
  for (int i = 0; i < out.items; ++i) {
    std::array<double, 6> raw;
    for (int k = 0; k < 6; ++k) raw[k] = out.rot6(i, k);
    const double angle = GeodesicAngle(ProjectToSO3(raw), RotMat::Identity());
    worst = std::max(worst, angle);
    sum += angle;
  }
  Info(Fmt("identity check (seed %llu encoder): mean %.4f rad, max %.4f rad, bound %.2f rad -> %s",
           static_cast<unsigned long long>(kSeeds[pick]), sum / out.items, worst,
           kIdentityRotation, worst <= kIdentityRotation ? "within" : "exceeded"));
  return runs[pick];
}

// ---- criterion 4 -------------------------------------------------------------

void HerEffectiveness(const fs::path& work) {
  std::vector<double> her, plain;
  for (std::uint64_t s : kSeeds) {
    RunConfig c = DeskConfig();
    c.train_objects = {"cube"};
    c.seed = s;
    her.push_back(RunOrReuse(work / ("her-cube-seed" + std::to_string(s)), c, nullptr).MeanTrain());
    c.replay.relabel_k = 0;
    plain.push_back(
        RunOrReuse(work / ("noher-cube-seed" + std::to_string(s)), c, nullptr).MeanTrain());
  }
  const double h = Median(her), p = Median(plain);
  Line(4, h >= kHerSuccess && p <= h - kHerMargin, "HER effectiveness",
       Fmt("HER median %.3f (>= %.1f) %s, no relabel median %.3f (<= HER - %.1f) %s", h,
           kHerSuccess, List(her).c_str(), p, kHerMargin, List(plain).c_str()));
}

// ---- criteria 5 to 8 -----------------------------------------------------------

RunConfig MultiRun(PolicyMode mode, std::vector<std::string> train, std::uint64_t seed,
                   const Pretrained* encoder) {
  RunConfig c = MultiConfig();
  c.mode = mode;
  c.train_objects = std::move(train);
  c.heldout_objects = {kHighAspect, kNearSpherical};
  c.seed = seed;
  if (mode == PolicyMode::kGeometryAware) c.encoder_path = encoder->path.string();
  return c;
}

std::string Tag(const std::string& what, std::uint64_t seed) {
  return what + "-seed" + std::to_string(seed);
}

void MultiTaskCriteria(const fs::path& work, const Pretrained& encoder) {
  std::vector<double> geo_train, van_train, single_mean;
  std::vector<double> geo_held, van_held, gap_high, gap_round;
  std::vector<double> tuned_held;
  for (std::uint64_t s : kSeeds) {
    const Summary geo = RunOrReuse(work / Tag("geo4", s),
                                   MultiRun(PolicyMode::kGeometryAware, kFourObjects, s, &encoder),
                                   &encoder.model);
    const Summary van = RunOrReuse(work / Tag("vanilla4", s),
                                   MultiRun(PolicyMode::kVanilla, kFourObjects, s, nullptr), nullptr);
    double single = 0.0;
    for (const std::string& name : kFourObjects) {
      RunConfig c = MultiRun(PolicyMode::kVanilla, {name}, s, nullptr);
      c.heldout_objects.clear();
      single += RunOrReuse(work / Tag("single-" + name, s), c, nullptr).MeanTrain();
    }
    geo_train.push_back(geo.MeanTrain());
    van_train.push_back(van.MeanTrain());
    single_mean.push_back(single / kFourObjects.size());
    geo_held.push_back(0.5 * (geo.heldout[0] + geo.heldout[1]));
    van_held.push_back(0.5 * (van.heldout[0] + van.heldout[1]));
    gap_high.push_back(geo.heldout[0] - van.heldout[0]);
    gap_round.push_back(geo.heldout[1] - van.heldout[1]);
  }

  {
    const double g = Median(geo_train), v = Median(van_train), o = Median(single_mean);
    Line(5, std::abs(g - o) <= kParityTol && g >= v, "multi-task parity",
         Fmt("geometry-aware %.3f %s vs single-task mean %.3f %s, diff %+.3f (|diff| <= %.2f), "
             "vanilla %.3f %s (geometry-aware >= vanilla)",
             g, List(geo_train).c_str(), o, List(single_mean).c_str(), g - o, kParityTol, v,
             List(van_train).c_str()));
  }
  {
    const double g = Median(geo_held), v = Median(van_held);
    const double hi = Median(gap_high), lo = Median(gap_round);
    Line(6, g >= v && hi >= lo, "zero-shot direction",
         Fmt("held-out geometry-aware %.3f %s >= vanilla %.3f %s; gap %s %.3f >= gap %s %.3f", g,
             List(geo_held).c_str(), v, List(van_held).c_str(), kHighAspect.c_str(), hi,
             kNearSpherical.c_str(), lo));
  }

  for (std::uint64_t s : kSeeds) {
    RunConfig c = MultiRun(PolicyMode::kGeometryAware, kFourObjects, s, &encoder);
    c.agent.finetune_encoder = true;
    const Summary tuned = RunOrReuse(work / Tag("geo4-finetune", s), c, &encoder.model);
    tuned_held.push_back(0.5 * (tuned.heldout[0] + tuned.heldout[1]));
  }
  {
    const double t = Median(tuned_held), f = Median(geo_held);
    Line(7, t <= f + kFinetuneSlack, "frozen vs fine-tuned",
         Fmt("held-out fine-tuned %.3f %s, frozen %.3f %s (fine-tuned <= frozen + %.2f)", t,
             List(tuned_held).c_str(), f, List(geo_held).c_str(), kFinetuneSlack));
  }

  std::map<int, std::vector<double>> by_count;
  by_count[4] = geo_held;
  for (int count : {2, 8}) {
    const std::vector<std::string> train(kTrainPool.begin(), kTrainPool.begin() + count);
    for (std::uint64_t s : kSeeds) {
      const Summary r =
          RunOrReuse(work / Tag("geo" + std::to_string(count), s),
                     MultiRun(PolicyMode::kGeometryAware, train, s, &encoder), &encoder.model);
      by_count[count].push_back(0.5 * (r.heldout[0] + r.heldout[1]));
    }
  }
  {
    const double m2 = Median(by_count[2]), m4 = Median(by_count[4]), m8 = Median(by_count[8]);
    Line(8, m4 >= m2 - kScalingSlack && m8 >= m4 - kScalingSlack, "scaling direction",
         Fmt("held-out geometry-aware at 2/4/8 objects: %.3f %s, %.3f %s, %.3f %s (steps >= "
             "-%.2f)",
             m2, List(by_count[2]).c_str(), m4, List(by_count[4]).c_str(), m8,
             List(by_count[8]).c_str(), kScalingSlack));
  }
}

// ---- criterion 9 -------------------------------------------------------------

void Determinism(const fs::path& work, const Pretrained& encoder) {
  bool same = true;
  std::string detail;
  for (PolicyMode mode : {PolicyMode::kVanilla, PolicyMode::kGeometryAware}) {
    RunConfig c = MultiRun(mode, {"cube", "rod"}, 9, &encoder);
    c.heldout_objects = {kHighAspect};
    c.epochs = 3;
    c.cycles = 2;
    c.rollouts = 4;
    c.updates = 20;
    c.eval_episodes = 5;
    const EncoderModel* e = mode == PolicyMode::kGeometryAware ? &encoder.model : nullptr;
    const ObjectSet objects{Presets(c.train_objects), Presets(c.heldout_objects)};
    std::string bytes[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path dir =
          work / ("determinism-" + std::string(PolicyModeName(mode)) + "-" + std::to_string(run));
      TrainOptions options;
      options.run_dir = dir;
      Train(c, objects, e, options);
      bytes[run] = ReadFileBytes(dir / "metrics.jsonl");
    }
    const bool equal = !bytes[0].empty() && bytes[0] == bytes[1];
    same = same && equal;
    detail += Fmt("%s %s (%zu bytes); ", std::string(PolicyModeName(mode)).c_str(),
                  equal ? "identical" : "DIFFERENT", bytes[0].size());
  }
  Line(9, same, "determinism", "metrics.jsonl across two runs: " + detail);
}

// ---- criterion 10 ------------------------------------------------------------

void PhysicsSanity() {
  EnvConfig config;
  config.damping = 0.0;
  const Env env(config, Presets({"cube", "bar", "disk", "pinched", "spindle"}));
  Rng rng(1010);
  double worst_energy = 0.0;
  for (int id = 0; id < env.num_objects(); ++id) {
    EnvState s = env.Reset(id, GoalMode::kSO3, rng);
    s.omega = Vec3(3.0, -2.0, 4.0);
    const double e0 = RotationalEnergy(s.inertia, s.omega);
    Action zero{};
    for (int t = 0; t < config.episode_length; ++t) s = env.Step(s, zero).state;
    worst_energy =
        std::max(worst_energy, std::abs(RotationalEnergy(s.inertia, s.omega) - e0) / e0);
  }
  const double a = 0.06, b = 0.10, c = 0.04, m = 0.35;
  ShapeSpec box;
  box.size = {a, b, c};
  const Mat3 inertia = InertiaTensor(ProceduralObject(box), m);
  const double expected[3] = {m * (b * b + c * c) / 12, m * (a * a + c * c) / 12,
                              m * (a * a + b * b) / 12};
  double worst_inertia = 0.0;
  for (int i = 0; i < 3; ++i) {
    worst_inertia = std::max(worst_inertia, std::abs(inertia(i, i) - expected[i]) / expected[i]);
  }
  const double off = (inertia - Mat3(inertia.diagonal().asDiagonal())).cwiseAbs().maxCoeff() /
                     inertia.diagonal().maxCoeff();
  worst_inertia = std::max(worst_inertia, off);
  Line(10, worst_energy <= kEnergyTol && worst_inertia <= kInertiaTol, "physics sanity",
       Fmt("torque-free energy drift %.2e (tol %.0e) over %d steps, cuboid inertia rel err %.2e "
           "(tol %.0e)",
           worst_energy, kEnergyTol, config.episode_length, worst_inertia, kInertiaTol));
}

}  // namespace
}  // namespace geodex

int main(int argc, char** argv) {
  using namespace geodex;
  CLI::App app("Acceptance checks", "geodex_acceptance");
  std::string work_dir = "acceptance_work";
  std::vector<int> only;
  bool fresh = false;
  app.add_option("--work-dir", work_dir, "run directories and cached results");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_flag("--fresh", fresh, "delete the work directory first");
  CLI11_PARSE(app, argc, argv);
  auto wanted = [&](int c) { return only.empty() || std::count(only.begin(), only.end(), c); };

  // Canonical, so cached runs match however the directory is spelled; the
  // encoder path inside each config hash depends on it.
  const fs::path work = fs::weakly_canonical(fs::absolute(work_dir));
  if (fresh) fs::remove_all(work);
  fs::create_directories(work);
  const auto start = Clock::now();
  try {
    if (wanted(1)) RotationLossIdentity();
    if (wanted(2)) GradientIntegrity();
    if (wanted(10)) PhysicsSanity();
    std::optional<Pretrained> encoder;
    const bool needs_encoder = wanted(3) || wanted(5) || wanted(6) || wanted(7) ||
                               wanted(8) || wanted(9);
    if (needs_encoder) encoder = EncoderPretraining(work);
    if (wanted(9)) Determinism(work, *encoder);
    if (wanted(4)) HerEffectiveness(work);
    if (wanted(5) || wanted(6) || wanted(7) || wanted(8)) MultiTaskCriteria(work, *encoder);
  } catch (const std::exception& e) {
    std::printf("FAIL  aborted: %s\n", e.what());
    return 1;
  }
  int failed = 0;
  for (const Outcome& o : outcomes) failed += o.pass ? 0 : 1;
  Info(Fmt("%d runs trained, %d reused from %s, %.0f s total", trained_runs, reused_runs,
           work.c_str(), Seconds(start)));
  std::printf("%s  %zu criteria checked, %d failed\n", failed == 0 ? "PASS" : "FAIL",
              outcomes.size(), failed);
  return failed == 0 ? 0 : 1;
}
