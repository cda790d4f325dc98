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

#include "geodex/cli.h"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
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
#include "geodex/registry.h"

namespace geodex {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void Invalid(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

std::string Absolute(const fs::path& path) {
  return fs::absolute(path).lexically_normal().string();
}

std::optional<std::uint64_t> SeedFromEnvironment() {
  const char* text = std::getenv("GEODEX_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  const char* end = text + std::strlen(text);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text, end, seed);
  if (ec != std::errc() || ptr != end) {
    Invalid("GEODEX_SEED is not an unsigned integer: '" + std::string(text) + "'");
  }
  return seed;
}

json ReadJson(const fs::path& path) {
  if (!fs::is_regular_file(path)) Invalid("no such file: " + path.string());
  try {
    return json::parse(ReadFileBytes(path));
  } catch (const json::exception& e) {
    Invalid(path.string() + ": " + e.what());
  }
}

std::vector<std::string> Names(const std::vector<ObjectRecord>& objects) {
  std::vector<std::string> names;
  for (const ObjectRecord& o : objects) names.push_back(o.name);
  return names;
}

void CapWorkers(int workers) {
  if (workers < 0) Invalid("--workers must be >= 0");
  if (workers > 0) omp_set_num_threads(workers);
}

// Flags shared by train and sweep; each one overrides the config file.
struct RunFlags {
  CLI::App* cmd = nullptr;
  std::string config_file;
  std::string mode, registry, goal_mode, encoder;
  std::vector<std::string> train, heldout;
  int epochs = 0, cycles = 0, rollouts = 0, updates = 0, eval_episodes = 0;
  int workers = 0, batch = 0, relabel_k = 0, cloud_points = 0;
  std::vector<int> hidden;
  double lr = 0.0;
  std::uint64_t seed = 0;
  bool finetune = false;

  bool Given(const std::string& name) const { return cmd->count(name) > 0; }
};

void AddRunFlags(CLI::App* cmd, RunFlags& f) {
  f.cmd = cmd;
  cmd->add_option("--config", f.config_file, "JSON run config; flags override its values");
  cmd->add_option("--mode", f.mode, "vanilla or geometry-aware");
  cmd->add_option("--objects", f.registry, "object registry JSON");
  cmd->add_option("--train", f.train, "training objects (default: all but held-out)")
      ->delimiter(',');
  cmd->add_option("--heldout", f.heldout, "held-out objects for zero-shot evaluation")
      ->delimiter(',');
  cmd->add_option("--goal-mode", f.goal_mode, "z-axis or so3");
  cmd->add_option("--encoder", f.encoder, "encoder checkpoint or pretraining run directory");
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--cycles", f.cycles, "target-network cycles per epoch");
  cmd->add_option("--rollouts", f.rollouts, "episodes per epoch per object");
  cmd->add_option("--updates", f.updates, "learner updates per epoch");
  cmd->add_option("--eval-episodes", f.eval_episodes, "per object");
  cmd->add_option("--seed", f.seed, "falls back to GEODEX_SEED");
  cmd->add_option("--workers", f.workers, "parallelism cap, 0 = all cores");
  cmd->add_option("--batch", f.batch, "minibatch per object");
  cmd->add_option("--hidden", f.hidden, "actor and critic hidden widths")->delimiter(',');
  cmd->add_option("--lr", f.lr, "actor and critic learning rate");
  cmd->add_option("--relabel-k", f.relabel_k, "HER future goals per real goal");
  cmd->add_option("--cloud-points", f.cloud_points, "points per observed cloud");
  cmd->add_flag("--finetune-encoder", f.finetune, "train the encoder with the critic");
}

RunConfig ResolveRunConfig(const RunFlags& f) {
  RunConfig c;
  bool seed_in_file = false;
  if (!f.config_file.empty()) {
    const json j = ReadJson(f.config_file);
    c = RunConfigFromJson(j);
    seed_in_file = j.contains("seed");
  }
  if (f.Given("--mode")) c.mode = PolicyModeFromName(f.mode);
  if (f.Given("--objects")) c.registry = f.registry;
  if (f.Given("--train")) c.train_objects = f.train;
  if (f.Given("--heldout")) c.heldout_objects = f.heldout;
  if (f.Given("--goal-mode")) c.goal_mode = GoalModeFromName(f.goal_mode);
  if (f.Given("--encoder")) c.encoder_path = f.encoder;
  if (f.Given("--epochs")) c.epochs = f.epochs;
  if (f.Given("--cycles")) c.cycles = f.cycles;
  if (f.Given("--rollouts")) c.rollouts = f.rollouts;
  if (f.Given("--updates")) c.updates = f.updates;
  if (f.Given("--eval-episodes")) c.eval_episodes = f.eval_episodes;
  if (f.Given("--workers")) c.workers = f.workers;
  if (f.Given("--batch")) c.agent.batch = f.batch;
  if (f.Given("--hidden")) c.agent.hidden = f.hidden;
  if (f.Given("--lr")) c.agent.actor_lr = c.agent.critic_lr = f.lr;
  if (f.Given("--relabel-k")) c.replay.relabel_k = f.relabel_k;
  if (f.Given("--cloud-points")) c.env.cloud_points = f.cloud_points;
  if (f.finetune) c.agent.finetune_encoder = true;
  if (f.Given("--seed")) {
    c.seed = f.seed;
  } else if (!seed_in_file) {
    if (const auto seed = SeedFromEnvironment()) c.seed = *seed;
  }
  if (c.registry.empty()) Invalid("no object registry; pass --objects");
  c.registry = Absolute(c.registry);
  return c;
}

// Fills in the default training set and materializes both object lists.
ObjectSet ResolveObjects(RunConfig& c) {
  const Registry registry = LoadRegistry(c.registry);
  for (const std::string& name : c.heldout_objects) registry.Find(name);
  if (c.train_objects.empty()) {
    for (const RegistryEntry& e : registry.entries) {
      const auto& held = c.heldout_objects;
      if (std::find(held.begin(), held.end(), e.name) == held.end()) {
        c.train_objects.push_back(e.name);
      }
    }
  }
  for (const std::string& name : c.train_objects) {
    const auto& held = c.heldout_objects;
    if (std::find(held.begin(), held.end(), name) != held.end()) {
      Invalid("object '" + name + "' is both a training and a held-out object");
    }
  }
  if (c.train_objects.empty()) Invalid("no training objects");
  ObjectSet objects;
  objects.train = MaterializeObjects(registry, c.train_objects);
  if (!c.heldout_objects.empty()) objects.heldout = MaterializeObjects(registry, c.heldout_objects);
  return objects;
}

EncoderModel LoadEncoder(const std::string& path_text) {
  fs::path path = path_text;
  if (fs::is_directory(path)) path = path / "checkpoints" / "encoder.ckpt";
  if (!fs::is_regular_file(path)) Invalid("no encoder checkpoint at " + path.string());
  return EncoderModel::FromCheckpoint(ReadCheckpointFile(path));
}

// Loads the encoder iff `needed`, recording its resolved path in `c`.
std::optional<EncoderModel> ResolveEncoder(RunConfig& c, bool needed) {
  if (!needed) {
    if (!c.encoder_path.empty()) Invalid("--encoder applies to geometry-aware runs only");
    return std::nullopt;
  }
  if (c.encoder_path.empty()) Invalid("geometry-aware runs need --encoder");
  fs::path path = c.encoder_path;
  if (fs::is_directory(path)) path = path / "checkpoints" / "encoder.ckpt";
  c.encoder_path = Absolute(path);
  return LoadEncoder(c.encoder_path);
}

// ---- gen-objects / ingest -------------------------------------------------

int GenObjects(const std::string& preset, const fs::path& out_dir, double mass,
               std::ostream& out) {
  PresetShapes(preset);  // rejects unknown presets before writing
  if (!(mass > 0)) Invalid("--mass must be > 0");
  const Registry registry = GenerateObjects(preset, out_dir, mass);
  WriteFileBytes(out_dir / "config.json",
                 json{{"command", "gen-objects"}, {"preset", preset}, {"mass", mass}}.dump(2) +
                     "\n");
  out << "wrote " << registry.entries.size() << " objects to " << (out_dir / "registry.json").string()
      << "\n";
  return kExitOk;
}

int Ingest(const std::vector<std::string>& inputs, const fs::path& out_dir, double mass,
           std::ostream& out) {
  if (!(mass > 0)) Invalid("--mass must be > 0");
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const Registry registry = IngestMeshes(paths, out_dir, mass);
  json sources = json::array();
  for (const fs::path& p : paths) sources.push_back(Absolute(p));
  WriteFileBytes(out_dir / "config.json",
                 json{{"command", "ingest"}, {"inputs", sources}, {"mass", mass}}.dump(2) + "\n");
  out << "ingested " << registry.entries.size() << " meshes into "
      << (out_dir / "registry.json").string() << "\n";
  return kExitOk;
}

// ---- pretrain-encoder -------------------------------------------------------

json PretrainConfigToJson(const PretrainConfig& c) {
  return {{"steps", c.steps},
          {"batch", c.batch},
          {"points", c.points},
          {"alpha", c.alpha},
          {"lr", c.lr},
          {"final_lr_fraction", c.final_lr_fraction},
          {"seed", c.seed},
          {"validation_batches", c.validation_batches},
          {"log_every", c.log_every},
          {"trunk_widths", c.trunk_widths}};
}

PretrainConfig PretrainConfigFromJson(const json& j, bool* seed_in_file) {
  if (!j.is_object()) Invalid("pretraining config must be a JSON object");
  static const std::vector<std::string> kKeys = {
      "steps", "batch", "points", "alpha", "lr", "final_lr_fraction", "seed",
      "validation_batches", "log_every", "trunk_widths", "registry", "objects"};
  for (const auto& item : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end()) {
      Invalid("unknown pretraining config key '" + item.key() + "'");
    }
  }
  PretrainConfig c;
  try {
    c.steps = j.value("steps", c.steps);
    c.batch = j.value("batch", c.batch);
    c.points = j.value("points", c.points);
    c.alpha = j.value("alpha", c.alpha);
    c.lr = j.value("lr", c.lr);
    c.final_lr_fraction = j.value("final_lr_fraction", c.final_lr_fraction);
    c.seed = j.value("seed", c.seed);
    c.validation_batches = j.value("validation_batches", c.validation_batches);
    c.log_every = j.value("log_every", c.log_every);
    c.trunk_widths = j.value("trunk_widths", c.trunk_widths);
  } catch (const json::exception& e) {
    Invalid(std::string("pretraining config: ") + e.what());
  }
  *seed_in_file = j.contains("seed");
  return c;
}

json PretrainRow(std::string_view phase, int step, const PretrainMetrics& m) {
  return {{"phase", phase}, {"step", step},   {"L_cls", m.l_cls},
          {"L_rot", m.l_rot}, {"L_e", m.l_e},   {"acc", m.accuracy},
          {"rot_err_rad", m.rot_err}};
}

std::string Shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Pretraining runs log losses per step instead of success rates.
std::string PretrainReportCsv(const std::vector<json>& rows) {
  std::string csv = "phase,step,L_cls,L_rot,L_e,acc,rot_err_rad\n";
  for (const json& r : rows) {
    csv += r.at("phase").get<std::string>() + "," + std::to_string(r.at("step").get<int>());
    for (const char* key : {"L_cls", "L_rot", "L_e", "acc", "rot_err_rad"}) {
      csv += "," + Shortest(r.at(key).get<double>());
    }
    csv += "\n";
  }
  return csv;
}

struct PretrainFlags {
  CLI::App* cmd = nullptr;
  std::string config_file, registry, out;
  std::vector<std::string> names;
  int steps = 0, batch = 0, points = 0, validation_batches = 0, log_every = 0, workers = 0;
  double alpha = 0.0, lr = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> trunk;

  bool Given(const std::string& name) const { return cmd->count(name) > 0; }
};

int PretrainEncoder(const PretrainFlags& f, std::ostream& out) {
  PretrainConfig c;
  bool seed_in_file = false;
  std::string registry_path;
  std::vector<std::string> names;
  if (!f.config_file.empty()) {
    const json j = ReadJson(f.config_file);
    c = PretrainConfigFromJson(j, &seed_in_file);
    registry_path = j.value("registry", std::string());
    names = j.value("objects", names);
  }
  if (f.Given("--objects")) registry_path = f.registry;
  if (f.Given("--names")) names = f.names;
  if (f.Given("--steps")) c.steps = f.steps;
  if (f.Given("--batch")) c.batch = f.batch;
  if (f.Given("--points")) c.points = f.points;
  if (f.Given("--alpha")) c.alpha = f.alpha;
  if (f.Given("--lr")) c.lr = f.lr;
  if (f.Given("--validation-batches")) c.validation_batches = f.validation_batches;
  if (f.Given("--log-every")) c.log_every = f.log_every;
  if (f.Given("--trunk")) c.trunk_widths = f.trunk;
  if (f.Given("--seed")) {
    c.seed = f.seed;
  } else if (!seed_in_file) {
    if (const auto seed = SeedFromEnvironment()) c.seed = *seed;
  }
  CapWorkers(f.workers);
  ValidatePretrainConfig(c);
  if (registry_path.empty()) Invalid("no object registry; pass --objects");
  registry_path = Absolute(registry_path);
  const Registry registry = LoadRegistry(registry_path);
  const std::vector<ObjectRecord> objects = MaterializeObjects(registry, names);
  if (objects.size() < 2) {
    throw Error(ErrorCode::kTooFewObjects, "encoder pretraining needs >= 2 objects");
  }
  std::vector<Mesh> meshes;
  for (const ObjectRecord& o : objects) meshes.push_back(o.mesh);

  const fs::path dir = f.out;
  json config = PretrainConfigToJson(c);
  config["registry"] = registry_path;
  config["objects"] = Names(objects);
  std::error_code ignored;
  fs::remove(dir / "metrics.jsonl", ignored);
  PrepareRunDir(dir, config);

  std::vector<json> rows;
  std::string text;
  const PretrainResult result = Pretrain(meshes, c, [&](const PretrainLogRow& row) {
    rows.push_back(PretrainRow("pretrain", row.step, row.metrics));
    text += rows.back().dump() + "\n";
    out << "step " << row.step << "  accuracy " << row.metrics.accuracy << "  rotation error "
        << row.metrics.rot_err << "\n";
  });
  rows.push_back(PretrainRow("validation", c.steps, result.validation));
  text += rows.back().dump() + "\n";
  WriteCheckpointFile(result.model.ToCheckpoint(), dir / "checkpoints" / "encoder.ckpt");
  WriteFileBytes(dir / "metrics.jsonl", text);
  WriteFileBytes(dir / "report.csv", PretrainReportCsv(rows));
  out << "validation accuracy " << result.validation.accuracy << ", rotation error "
      << result.validation.rot_err << " rad\n";
  return kExitOk;
}

// ---- train / sweep ---------------------------------------------------------

int TrainCommand(const RunFlags& f, const fs::path& dir, bool resume, int checkpoint_every,
                 std::ostream& out) {
  RunConfig c = ResolveRunConfig(f);
  ObjectSet objects = ResolveObjects(c);
  const std::optional<EncoderModel> encoder =
      ResolveEncoder(c, c.mode == PolicyMode::kGeometryAware);
  ValidateRunConfig(c);
  CapWorkers(c.workers);
  if (checkpoint_every < 0) Invalid("--checkpoint-every must be >= 0");
  if (resume && !fs::is_regular_file(dir / "checkpoints" / "state.json")) {
    Invalid("nothing to resume in " + dir.string());
  }
  TrainOptions options;
  options.run_dir = dir;
  options.resume = resume;
  options.checkpoint_every = checkpoint_every;
  const RunResult result = Train(c, objects, encoder ? &*encoder : nullptr, options);
  out << "train success " << result.MeanTrainSuccess();
  if (!objects.heldout.empty()) out << ", held-out success " << result.MeanHeldoutSuccess();
  out << ", samples " << result.samples << ", " << result.wall_seconds << " s\n";
  return kExitOk;
}

int SweepCommand(const RunFlags& f, const std::vector<int>& counts,
                 const std::vector<std::string>& mode_names,
                 const std::vector<std::uint64_t>& seed_list, const fs::path& dir,
                 std::ostream& out) {
  RunConfig c = ResolveRunConfig(f);
  ObjectSet objects = ResolveObjects(c);
  if (counts.empty()) Invalid("--counts is empty");
  for (int count : counts) {
    if (count < 1 || count > static_cast<int>(objects.train.size())) {
      Invalid("sweep count " + std::to_string(count) + " is outside 1.." +
              std::to_string(objects.train.size()));
    }
  }
  std::vector<PolicyMode> modes;
  for (const std::string& name : mode_names) modes.push_back(PolicyModeFromName(name));
  if (modes.empty()) Invalid("--modes is empty");
  const bool geometric =
      std::find(modes.begin(), modes.end(), PolicyMode::kGeometryAware) != modes.end();
  const std::optional<EncoderModel> encoder = ResolveEncoder(c, geometric);
  for (PolicyMode mode : modes) {
    RunConfig probe = c;
    probe.mode = mode;
    if (mode == PolicyMode::kVanilla) probe.agent.finetune_encoder = false;
    ValidateRunConfig(probe);
  }
  const std::vector<std::uint64_t> seeds =
      seed_list.empty() ? std::vector<std::uint64_t>{c.seed} : seed_list;
  CapWorkers(c.workers);

  json config = {{"base", RunConfigToJson(c)}, {"counts", counts}, {"modes", mode_names},
                 {"seeds", seeds}};
  std::error_code ignored;
  fs::remove(dir / "metrics.jsonl", ignored);
  PrepareRunDir(dir, config);
  const std::vector<SweepRow> rows = ScalingSweep(c, objects, counts, modes, seeds,
                                                  encoder ? &*encoder : nullptr, dir / "runs");
  const std::string csv = SweepCsv(rows);
  WriteFileBytes(dir / "sweep.csv", csv);
  WriteFileBytes(dir / "report.csv", ReportCsv({}));
  out << csv;
  return kExitOk;
}

// ---- split -------------------------------------------------------------------

struct SplitFlags {
  CLI::App* cmd = nullptr;
  std::string config_file, registry, out;
  std::vector<std::string> names;
  double ratio = 29.0 / 114.0;
  int probe_epochs = 0, probe_cycles = 0, probe_rollouts = 0, probe_updates = 0;
  int workers = 0;
  std::uint64_t seed = 0;

  bool Given(const std::string& name) const { return cmd->count(name) > 0; }
};

int SplitCommand(const SplitFlags& f, std::ostream& out) {
  RunConfig probe;
  bool seed_in_file = false;
  if (!f.config_file.empty()) {
    const json j = ReadJson(f.config_file);
    probe = RunConfigFromJson(j);
    seed_in_file = j.contains("seed");
  } else {
    // Cheap stand-in for fully trained oracles.
    probe.epochs = 5;
    probe.cycles = 5;
    probe.rollouts = 10;
    probe.updates = 50;
  }
  if (f.Given("--objects")) probe.registry = f.registry;
  if (f.Given("--probe-epochs")) probe.epochs = f.probe_epochs;
  if (f.Given("--probe-cycles")) probe.cycles = f.probe_cycles;
  if (f.Given("--probe-rollouts")) probe.rollouts = f.probe_rollouts;
  if (f.Given("--probe-updates")) probe.updates = f.probe_updates;
  if (f.Given("--workers")) probe.workers = f.workers;
  if (f.Given("--seed")) {
    probe.seed = f.seed;
  } else if (!seed_in_file) {
    if (const auto seed = SeedFromEnvironment()) probe.seed = *seed;
  }
  probe.mode = PolicyMode::kVanilla;
  probe.agent.finetune_encoder = false;
  probe.encoder_path.clear();
  probe.heldout_objects.clear();
  if (probe.registry.empty()) Invalid("no object registry; pass --objects");
  probe.registry = Absolute(probe.registry);
  ValidateRunConfig(probe);
  if (!(f.ratio > 0 && f.ratio < 1)) Invalid("--ratio must be in (0, 1)");
  CapWorkers(probe.workers);
  const Registry registry = LoadRegistry(probe.registry);
  const std::vector<ObjectRecord> objects = MaterializeObjects(registry, f.names);
  if (objects.size() < 4) {
    throw Error(ErrorCode::kTooFewObjects, "a split needs at least four objects");
  }
  probe.train_objects = Names(objects);

  const fs::path dir = f.out;
  json config = {{"probe", RunConfigToJson(probe)}, {"ratio", f.ratio}};
  std::error_code ignored;
  fs::remove(dir / "metrics.jsonl", ignored);
  PrepareRunDir(dir, config);
  const ObjectSplit result = SplitObjects(probe, objects, f.ratio);

  std::vector<MetricRow> rows;
  const std::uint64_t samples = static_cast<std::uint64_t>(probe.epochs) * probe.rollouts *
                                probe.env.episode_length;
  json scores = json::object();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    MetricRow row;
    row.epoch = probe.epochs - 1;
    row.object = objects[i].name;
    row.phase = "eval-train";
    row.success = result.scores[i];
    row.samples = samples;
    rows.push_back(row);
    scores[objects[i].name] = result.scores[i];
  }
  json train = json::array(), test = json::array();
  for (int i : result.split.train) train.push_back(objects[i].name);
  for (int i : result.split.test) test.push_back(objects[i].name);
  const json split = {{"train", train},
                      {"test", test},
                      {"train_mean", result.split.train_mean},
                      {"test_mean", result.split.test_mean},
                      {"scores", scores}};
  WriteFileBytes(dir / "metrics.jsonl", MetricsText(rows));
  WriteFileBytes(dir / "report.csv", ReportCsv(rows));
  WriteFileBytes(dir / "split.json", split.dump(2) + "\n");
  out << "train " << train.dump() << " mean " << result.split.train_mean << "\n"
      << "test  " << test.dump() << " mean " << result.split.test_mean << "\n";
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------------

struct EvalFlags {
  CLI::App* cmd = nullptr;
  std::string run, out, policy = "trained";
  int episodes = 0, workers = 0;
  std::uint64_t seed = 0;
  bool goal_is_initial = false;

  bool Given(const std::string& name) const { return cmd->count(name) > 0; }
};

int EvalCommand(const EvalFlags& f, std::ostream& out) {
  const fs::path run = f.run;
  const fs::path state_path = run / "checkpoints" / "state.json";
  if (!fs::is_regular_file(run / "config.json") || !fs::is_regular_file(state_path)) {
    Invalid(run.string() + " is not a trained run directory");
  }
  RunConfig c = RunConfigFromJson(ReadJson(run / "config.json"));
  const json state = ReadJson(state_path);
  if (f.policy != "trained" && f.policy != "random") {
    Invalid("--policy must be trained or random");
  }
  EvalOptions options;
  options.episodes = f.Given("--episodes") ? f.episodes : c.eval_episodes;
  options.seed = c.seed;
  if (f.Given("--seed")) {
    options.seed = f.seed;
  } else if (const auto seed = SeedFromEnvironment()) {
    options.seed = *seed;
  }
  options.goal_is_initial = f.goal_is_initial;
  options.workers = f.Given("--workers") ? f.workers : c.workers;
  if (options.episodes < 1) Invalid("--episodes must be >= 1");
  CapWorkers(options.workers);

  ObjectSet objects = ResolveObjects(c);
  const bool geometric = c.mode == PolicyMode::kGeometryAware;
  std::optional<EncoderModel> encoder;
  if (geometric && f.policy == "trained") {
    if (c.agent.finetune_encoder) {
      encoder = EncoderModel::FromCheckpoint(
          ReadCheckpointFile(run / "checkpoints" / "encoder_tuned.ckpt"));
      encoder->frozen = true;
    } else {
      encoder = LoadEncoder(c.encoder_path);
    }
  }
  std::vector<ObjectRecord> all = objects.train;
  all.insert(all.end(), objects.heldout.begin(), objects.heldout.end());
  const Env env(c.env, all);
  std::vector<int> ids(all.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);

  const fs::path dir = f.out;
  const json config = {{"command", "eval"},
                       {"run", Absolute(run)},
                       {"run_config_hash", ConfigHash(c)},
                       {"policy", f.policy},
                       {"episodes", options.episodes},
                       {"seed", options.seed},
                       {"goal_is_initial", options.goal_is_initial}};
  std::error_code ignored;
  fs::remove(dir / "metrics.jsonl", ignored);
  PrepareRunDir(dir, config);

  std::vector<double> success;
  if (f.policy == "random") {
    success = EvaluateRandom(env, ids, c.goal_mode, options);
  } else {
    const PolicyModel model =
        PolicyModel::FromCheckpoint(ReadCheckpointFile(run / "checkpoints" / "agent.ckpt"));
    success = Evaluate(model, encoder ? &*encoder : nullptr, env, ids, c.goal_mode, options);
  }
  std::vector<MetricRow> rows;
  const int epochs_done = state.at("epochs_done").get<int>();
  const auto samples = state.at("samples").get<std::uint64_t>();
  for (std::size_t i = 0; i < all.size(); ++i) {
    MetricRow row;
    row.epoch = epochs_done - 1;
    row.object = all[i].name;
    row.phase = i < objects.train.size() ? "eval-train" : "eval-heldout";
    row.success = success[i];
    row.samples = samples;
    rows.push_back(row);
    out << row.phase << " " << row.object << " " << row.success << "\n";
  }
  WriteFileBytes(dir / "metrics.jsonl", MetricsText(rows));
  WriteFileBytes(dir / "report.csv", ReportCsv(rows));
  return kExitOk;
}

// ---- report ----------------------------------------------------------------------

int ReportCommand(const fs::path& run, const std::string& out_path, std::ostream& out) {
  const fs::path metrics = run / "metrics.jsonl";
  if (!fs::is_regular_file(metrics)) Invalid(run.string() + " has no metrics.jsonl");
  const fs::path target = out_path.empty() ? run / "report.csv" : fs::path(out_path);
  std::vector<json> raw;
  std::istringstream in(ReadFileBytes(metrics));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) raw.push_back(json::parse(line));
  }
  if (!raw.empty() && raw.front().contains("step")) {
    WriteFileBytes(target, PretrainReportCsv(raw));
  } else {
    WriteReport(run, target);
  }
  out << "wrote " << target.string() << "\n";
  return kExitOk;
}

std::string OneLine(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Geometry-aware multi-task in-hand rotation toolkit", "geodex");
  app.require_subcommand(1);

  std::string preset, objects_out;
  double mass = 0.2;
  auto* gen = app.add_subcommand("gen-objects", "write procedural objects and a registry");
  gen->add_option("--preset", preset, "basic4, basic8, heldout2 or all")->required();
  gen->add_option("--out", objects_out, "output directory")->required();
  gen->add_option("--mass", mass, "kg per object");

  std::vector<std::string> inputs;
  auto* ingest = app.add_subcommand("ingest", "normalize OBJ/OFF/STL meshes into a registry");
  ingest->add_option("meshes", inputs, "mesh files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", objects_out, "output directory")->required();
  ingest->add_option("--mass", mass, "kg per object");

  SplitFlags split;
  auto* split_cmd = app.add_subcommand("split", "difficulty-balanced train/test split");
  split.cmd = split_cmd;
  split_cmd->add_option("--config", split.config_file, "JSON probe run config");
  split_cmd->add_option("--objects", split.registry, "object registry JSON");
  split_cmd->add_option("--names", split.names, "objects to split (default: all)")
      ->delimiter(',');
  split_cmd->add_option("--ratio", split.ratio, "test fraction");
  split_cmd->add_option("--probe-epochs", split.probe_epochs);
  split_cmd->add_option("--probe-cycles", split.probe_cycles);
  split_cmd->add_option("--probe-rollouts", split.probe_rollouts);
  split_cmd->add_option("--probe-updates", split.probe_updates);
  split_cmd->add_option("--seed", split.seed, "falls back to GEODEX_SEED");
  split_cmd->add_option("--workers", split.workers, "parallelism cap, 0 = all cores");
  split_cmd->add_option("--out", split.out, "run directory")->required();

  PretrainFlags pre;
  auto* pre_cmd = app.add_subcommand("pretrain-encoder", "pretrain the paired-cloud encoder");
  pre.cmd = pre_cmd;
  pre_cmd->add_option("--config", pre.config_file, "JSON pretraining config");
  pre_cmd->add_option("--objects", pre.registry, "object registry JSON");
  pre_cmd->add_option("--names", pre.names, "objects to use (default: all)")->delimiter(',');
  pre_cmd->add_option("--steps", pre.steps);
  pre_cmd->add_option("--batch", pre.batch);
  pre_cmd->add_option("--points", pre.points, "points per cloud");
  pre_cmd->add_option("--alpha", pre.alpha, "rotation loss weight");
  pre_cmd->add_option("--lr", pre.lr);
  pre_cmd->add_option("--trunk", pre.trunk, "three per-point widths")->delimiter(',');
  pre_cmd->add_option("--validation-batches", pre.validation_batches);
  pre_cmd->add_option("--log-every", pre.log_every);
  pre_cmd->add_option("--seed", pre.seed, "falls back to GEODEX_SEED");
  pre_cmd->add_option("--workers", pre.workers, "parallelism cap, 0 = all cores");
  pre_cmd->add_option("--out", pre.out, "run directory")->required();

  RunFlags train;
  std::string train_out;
  bool resume = false;
  int checkpoint_every = 10;
  auto* train_cmd = app.add_subcommand("train", "train a single- or multi-task policy");
  AddRunFlags(train_cmd, train);
  train_cmd->add_option("--out", train_out, "run directory")->required();
  train_cmd->add_flag("--resume", resume, "continue from the run directory's checkpoints");
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "epochs between checkpoints");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained run");
  eval.cmd = eval_cmd;
  eval_cmd->add_option("run", eval.run, "trained run directory")->required();
  eval_cmd->add_option("--out", eval.out, "output run directory")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "per object");
  eval_cmd->add_option("--seed", eval.seed, "falls back to GEODEX_SEED, then the run seed");
  eval_cmd->add_option("--policy", eval.policy, "trained or random");
  eval_cmd->add_flag("--goal-is-initial", eval.goal_is_initial,
                     "diagnostic: goal equals the initial orientation");
  eval_cmd->add_option("--workers", eval.workers, "parallelism cap, 0 = all cores");

  RunFlags sweep;
  std::string sweep_out;
  std::vector<int> counts = {2, 4, 8};
  std::vector<std::string> modes = {"vanilla", "geometry-aware"};
  std::vector<std::uint64_t> seeds;
  auto* sweep_cmd = app.add_subcommand("sweep", "held-out success against training-object count");
  AddRunFlags(sweep_cmd, sweep);
  sweep_cmd->add_option("--counts", counts, "nested training-set sizes")->delimiter(',');
  sweep_cmd->add_option("--modes", modes)->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "default: the resolved --seed")->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "sweep directory")->required();

  std::string report_run, report_out;
  auto* report_cmd = app.add_subcommand("report", "rebuild report.csv from metrics.jsonl");
  report_cmd->add_option("run", report_run, "run directory")->required();
  report_cmd->add_option("--out", report_out, "CSV path (default: <run>/report.csv)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "geodex: " << OneLine(e.what()) << "\n";
    return kExitValidation;
  }

  try {
    if (*gen) return GenObjects(preset, objects_out, mass, out);
    if (*ingest) return Ingest(inputs, objects_out, mass, out);
    if (*split_cmd) return SplitCommand(split, out);
    if (*pre_cmd) return PretrainEncoder(pre, out);
    if (*train_cmd) return TrainCommand(train, train_out, resume, checkpoint_every, out);
    if (*eval_cmd) return EvalCommand(eval, out);
    if (*sweep_cmd) return SweepCommand(sweep, counts, modes, seeds, sweep_out, out);
    if (*report_cmd) return ReportCommand(report_run, report_out, out);
  } catch (const Error& e) {
    err << "geodex: " << OneLine(e.what()) << "\n";
    return IsValidationError(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "geodex: " << OneLine(e.what()) << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace geodex
