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

#ifndef GEODEX_REPLAY_H_
#define GEODEX_REPLAY_H_

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "geodex/checkpoint.h"
#include "geodex/env.h"
#include "geodex/random.h"
#include "geodex/rotmath.h"

namespace geodex {

// One environment step. Observations hold the goal-free part of the policy
// input (proprioception and object state); the goal travels separately so it
// can be relabeled.
struct Transition {
  int object_id = 0;
  int step = 0;  // index within the episode
  std::array<double, kObservationDim> obs{};
  std::array<double, kObservationDim> next_obs{};
  Action action{};
  UnitQuaternion achieved;  // orientation after the step
  UnitQuaternion goal;
  int reward = 0;
  bool done = false;
  std::uint64_t cloud_seed = 0;       // surface sample behind obs
  std::uint64_t next_cloud_seed = 0;  // surface sample behind next_obs
};

using Episode = std::vector<Transition>;

struct SampledTransition {
  Transition transition;
  bool relabeled = false;
};

struct ReplayConfig {
  int capacity = 1000;  // episodes per object
  // Relabel with probability k / (k + 1); 0 disables relabeling.
  int relabel_k = 4;
  double success_threshold = 0.1;
};

void ValidateReplayConfig(const ReplayConfig& config);

// Per-object FIFO stores of whole episodes with "future" hindsight
// relabeling. Insert and sample are mutually atomic; a sample never sees a
// partially inserted episode.
class EpisodeBuffer {
 public:
  EpisodeBuffer(const ReplayConfig& config, int num_objects);
  // Moving locks the source; the mutex itself is not transferred.
  EpisodeBuffer(EpisodeBuffer&& other);
  EpisodeBuffer& operator=(EpisodeBuffer&&) = delete;

  const ReplayConfig& config() const { return config_; }
  int num_objects() const { return static_cast<int>(stores_.size()); }

  // Throws kMalformedEpisode for an empty episode, mixed object ids,
  // non-contiguous steps, an unknown object or an inconsistent reward.
  void Insert(Episode episode);

  // Uniform over every stored transition. Throws kEmptyBuffer.
  std::vector<SampledTransition> Sample(int batch, Rng& rng) const;
  // Uniform over one object's transitions. Throws kEmptyBuffer.
  std::vector<SampledTransition> SampleObject(int object_id, int batch, Rng& rng) const;

  std::size_t num_transitions() const;
  std::size_t num_episodes(int object_id) const;
  // Oldest first.
  std::vector<std::shared_ptr<const Episode>> Episodes(int object_id) const;
  std::uint64_t insertions() const;

  Checkpoint ToCheckpoint() const;
  static EpisodeBuffer FromCheckpoint(const Checkpoint& checkpoint);

 private:
  struct Store {
    std::deque<std::shared_ptr<const Episode>> episodes;
    std::vector<std::size_t> ends;  // running transition counts
  };

  SampledTransition Draw(const Store& store, Rng& rng) const;
  static void Reindex(Store& store);

  ReplayConfig config_;
  mutable std::mutex mutex_;
  std::vector<Store> stores_;
  std::uint64_t insertions_ = 0;
};

}  // namespace geodex

#endif  // GEODEX_REPLAY_H_
