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

#ifndef GEODEX_HARNESS_H_
#define GEODEX_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "geodex/agent.h"
#include "geodex/encoder.h"
#include "geodex/env.h"
#include "geodex/replay.h"

namespace geodex {

struct RunConfig {
  PolicyMode mode = PolicyMode::kVanilla;
  std::string registry;                     // path, for the record
  std::vector<std::string> train_objects;   // names
  std::vector<std::string> heldout_objects;
  GoalMode goal_mode = GoalMode::kZAxis;
  int epochs = 50;
  int cycles = 10;      // per epoch; targets move once per cycle
  int rollouts = 20;    // per epoch per object, spread over the cycles
  int updates = 400;    // per epoch, spread over the cycles
  int eval_episodes = 20;  // per object
  std::uint64_t seed = 0;
  std::string encoder_path;  // geometry-aware only
  int workers = 0;           // 0 = all cores
  EnvConfig env;
  AgentConfig agent;
  ReplayConfig replay;
};

void ValidateRunConfig(const RunConfig& config);
nlohmann::json EnvConfigToJson(const EnvConfig& config);
EnvConfig EnvConfigFromJson(const nlohmann::json& json);
nlohmann::json RunConfigToJson(const RunConfig& config);
// Missing keys keep defaults. Throws kConfig.
RunConfig RunConfigFromJson(const nlohmann::json& json);
// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string ConfigHash(const RunConfig& config);

struct ObjectSet {
  std::vector<ObjectRecord> train;
  std::vector<ObjectRecord> heldout;
};

struct MetricRow {
  int epoch = 0;
  std::string object;
  std::string phase;  // train, eval-train or eval-heldout
  double success = 0.0;
  std::uint64_t samples = 0;
  std::optional<double> actor_loss;
  std::optional<double> critic_loss;

  nlohmann::json ToJson() const;
  static MetricRow FromJson(const nlohmann::json& json);
};

struct RunResult {
  std::vector<MetricRow> rows;
  std::uint64_t samples = 0;
  double wall_seconds = 0.0;
  std::vector<double> final_train_success;    // per train object
  std::vector<double> final_heldout_success;  // per held-out object
  double MeanTrainSuccess() const;
  double MeanHeldoutSuccess() const;
};

struct TrainOptions {
  std::filesystem::path run_dir;  // empty: nothing is written
  bool resume = false;
  int stop_after_epoch = -1;  // simulates an interruption (tests)
  // Agent, replay and tuned-encoder state are saved every this many epochs
  // and at the end.
  int checkpoint_every = 10;
};

// Multi-task DDPG+HER; a single training object is the single-task case and
// runs the identical code path. The encoder is required iff geometry-aware.
RunResult Train(const RunConfig& config, const ObjectSet& objects, const EncoderModel* encoder,
                const TrainOptions& options = {});

struct EvalOptions {
  int episodes = 20;
  std::uint64_t seed = 0;
  // Diagnostic: the goal is set to the initial orientation.
  bool goal_is_initial = false;
  int workers = 0;
};

// Per-object final-step success with exploration off. Object ids index the
// environment.
std::vector<double> Evaluate(const PolicyModel& model, const EncoderModel* encoder,
                             const Env& env, const std::vector<int>& object_ids,
                             GoalMode goal_mode, const EvalOptions& options);
// Same protocol with uniformly random actions.
std::vector<double> EvaluateRandom(const Env& env, const std::vector<int>& object_ids,
                                   GoalMode goal_mode, const EvalOptions& options);

struct Split {
  std::vector<int> train;  // indices into the scored list
  std::vector<int> test;
  double train_mean = 0.0;
  double test_mean = 0.0;
};

// Sorts by descending score (seeded shuffle breaks ties) and deals the test
// set at evenly spaced ranks, round(ratio * n) of them. Throws
// kTooFewObjects below four objects.
Split SplitByScores(const std::vector<double>& scores, double ratio, Rng& rng);
// Difficulty probe: a short single-object run per object; the score is its
// final evaluation success.
std::vector<double> ProbeScores(const RunConfig& probe_config,
                                const std::vector<ObjectRecord>& objects);

struct ObjectSplit {
  std::vector<double> scores;  // probe score per input object
  Split split;
};

// Probes every object, then splits with a stream derived from the probe
// seed. Throws kTooFewObjects before any probe runs.
ObjectSplit SplitObjects(const RunConfig& probe_config, const std::vector<ObjectRecord>& objects,
                         double ratio);

struct SweepRow {
  int count = 0;
  PolicyMode mode = PolicyMode::kVanilla;
  std::uint64_t seed = 0;
  double train_success = 0.0;
  double heldout_success = 0.0;
};

// Trains on nested prefixes of objects.train for each count, evaluating on
// the fixed held-out set. With `runs_dir` set, every run gets its own run
// directory there, named by SweepRunName.
std::vector<SweepRow> ScalingSweep(const RunConfig& base, const ObjectSet& objects,
                                   const std::vector<int>& counts,
                                   const std::vector<PolicyMode>& modes,
                                   const std::vector<std::uint64_t>& seeds,
                                   const EncoderModel* encoder,
                                   const std::filesystem::path& runs_dir = {});
std::string SweepRunName(int count, PolicyMode mode, std::uint64_t seed);
std::string SweepCsv(const std::vector<SweepRow>& rows);

// Reads metrics.jsonl of a run directory.
// One JSON object per line, as written to metrics.jsonl.
std::string MetricsText(const std::vector<MetricRow>& rows);
std::vector<MetricRow> ReadMetrics(const std::filesystem::path& run_dir);
// CSV of every metric row, same values and order as metrics.jsonl.
std::string ReportCsv(const std::vector<MetricRow>& rows);
void WriteReport(const std::filesystem::path& run_dir, const std::filesystem::path& out);

// Creates config.json, checkpoints/, metrics.jsonl and report.csv when
// missing; config.json is always rewritten.
void PrepareRunDir(const std::filesystem::path& run_dir, const nlohmann::json& config);

}  // namespace geodex

#endif  // GEODEX_HARNESS_H_
