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

#include "geodex/replay.h"

#include <algorithm>
#include <string>

#include "json.hpp"
#include "geodex/error.h"

namespace geodex {

namespace {

// Seeds are stored as two exactly representable 32-bit halves.
void PushSeed(std::vector<double>& out, std::uint64_t seed) {
  out.push_back(static_cast<double>(seed >> 32));
  out.push_back(static_cast<double>(seed & 0xFFFFFFFFULL));
}

std::uint64_t ReadSeed(const double* in) {
  return (static_cast<std::uint64_t>(in[0]) << 32) | static_cast<std::uint64_t>(in[1]);
}

void PushQuat(std::vector<double>& out, const UnitQuaternion& q) {
  for (double v : q.ToArray()) out.push_back(v);
}

UnitQuaternion ReadQuat(const double* in) {
  return UnitQuaternion::FromUnitComponents(in[0], in[1], in[2], in[3]);
}

constexpr int kTransitionWidth = 2 + 2 * kObservationDim + kActionDim + 4 + 4 + 2 + 4;

}  // namespace

void ValidateReplayConfig(const ReplayConfig& config) {
  if (config.capacity < 1) throw Error(ErrorCode::kConfig, "replay: capacity must be >= 1");
  if (config.relabel_k < 0) throw Error(ErrorCode::kConfig, "replay: relabel_k must be >= 0");
  if (!(config.success_threshold > 0)) {
    throw Error(ErrorCode::kConfig, "replay: success_threshold must be positive");
  }
}

EpisodeBuffer::EpisodeBuffer(const ReplayConfig& config, int num_objects)
    : config_(config), stores_(static_cast<std::size_t>(std::max(0, num_objects))) {
  ValidateReplayConfig(config_);
}

EpisodeBuffer::EpisodeBuffer(EpisodeBuffer&& other) : config_(other.config_) {
  std::lock_guard<std::mutex> lock(other.mutex_);
  stores_ = std::move(other.stores_);
  insertions_ = other.insertions_;
}

void EpisodeBuffer::Reindex(Store& store) {
  store.ends.clear();
  std::size_t total = 0;
  for (const auto& episode : store.episodes) {
    total += episode->size();
    store.ends.push_back(total);
  }
}

void EpisodeBuffer::Insert(Episode episode) {
  if (episode.empty()) throw Error(ErrorCode::kMalformedEpisode, "empty episode");
  const int object_id = episode.front().object_id;
  if (object_id < 0 || object_id >= num_objects()) {
    throw Error(ErrorCode::kMalformedEpisode, "unknown object id " + std::to_string(object_id));
  }
  for (std::size_t t = 0; t < episode.size(); ++t) {
    const Transition& tr = episode[t];
    if (tr.object_id != object_id) {
      throw Error(ErrorCode::kMalformedEpisode, "episode mixes object ids");
    }
    if (tr.step != static_cast<int>(t)) {
      throw Error(ErrorCode::kMalformedEpisode, "episode steps are not contiguous");
    }
    if (tr.reward != ComputeReward(tr.achieved, tr.goal, config_.success_threshold)) {
      throw Error(ErrorCode::kMalformedEpisode,
                  "reward at step " + std::to_string(t) + " disagrees with the goal");
    }
  }
  auto stored = std::make_shared<const Episode>(std::move(episode));
  std::lock_guard<std::mutex> lock(mutex_);
  Store& store = stores_[object_id];
  store.episodes.push_back(std::move(stored));
  while (static_cast<int>(store.episodes.size()) > config_.capacity) store.episodes.pop_front();
  Reindex(store);
  ++insertions_;
}

SampledTransition EpisodeBuffer::Draw(const Store& store, Rng& rng) const {
  const std::size_t index = UniformIndex(rng, store.ends.back());
  const auto it = std::upper_bound(store.ends.begin(), store.ends.end(), index);
  const std::size_t e = static_cast<std::size_t>(it - store.ends.begin());
  const std::size_t start = e == 0 ? 0 : store.ends[e - 1];
  const Episode& episode = *store.episodes[e];
  const std::size_t t = index - start;
  SampledTransition out{episode[t], false};
  const double k = config_.relabel_k;
  if (k > 0 && Uniform01(rng) < k / (k + 1.0)) {
    const std::size_t future = t + UniformIndex(rng, episode.size() - t);
    out.transition.goal = episode[future].achieved;
    out.transition.reward = ComputeReward(out.transition.achieved, out.transition.goal,
                                          config_.success_threshold);
    out.relabeled = true;
  }
  return out;
}

std::vector<SampledTransition> EpisodeBuffer::Sample(int batch, Rng& rng) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::size_t> object_ends;
  std::size_t total = 0;
  for (const Store& store : stores_) {
    total += store.ends.empty() ? 0 : store.ends.back();
    object_ends.push_back(total);
  }
  if (total == 0) throw Error(ErrorCode::kEmptyBuffer, "replay buffer is empty");
  std::vector<SampledTransition> out;
  out.reserve(std::max(0, batch));
  for (int b = 0; b < batch; ++b) {
    // Pick the object in proportion to its transitions, then draw within it;
    // together this is uniform over all stored transitions.
    const std::size_t index = UniformIndex(rng, total);
    const std::size_t object = static_cast<std::size_t>(
        std::upper_bound(object_ends.begin(), object_ends.end(), index) - object_ends.begin());
    out.push_back(Draw(stores_[object], rng));
  }
  return out;
}

std::vector<SampledTransition> EpisodeBuffer::SampleObject(int object_id, int batch,
                                                           Rng& rng) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (object_id < 0 || object_id >= num_objects() || stores_[object_id].ends.empty()) {
    throw Error(ErrorCode::kEmptyBuffer,
                "no stored transitions for object " + std::to_string(object_id));
  }
  std::vector<SampledTransition> out;
  out.reserve(std::max(0, batch));
  for (int b = 0; b < batch; ++b) out.push_back(Draw(stores_[object_id], rng));
  return out;
}

std::size_t EpisodeBuffer::num_transitions() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::size_t total = 0;
  for (const Store& store : stores_) total += store.ends.empty() ? 0 : store.ends.back();
  return total;
}

std::size_t EpisodeBuffer::num_episodes(int object_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stores_.at(object_id).episodes.size();
}

std::vector<std::shared_ptr<const Episode>> EpisodeBuffer::Episodes(int object_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto& episodes = stores_.at(object_id).episodes;
  return {episodes.begin(), episodes.end()};
}

std::uint64_t EpisodeBuffer::insertions() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return insertions_;
}

Checkpoint EpisodeBuffer::ToCheckpoint() const {
  std::lock_guard<std::mutex> lock(mutex_);
  Checkpoint ckpt;
  ckpt.component = "replay";
  nlohmann::json meta;
  meta["capacity"] = config_.capacity;
  meta["relabel_k"] = config_.relabel_k;
  meta["success_threshold"] = config_.success_threshold;
  meta["num_objects"] = stores_.size();
  meta["insertions"] = insertions_;
  ckpt.meta_json = meta.dump();
  std::vector<double> lengths, rows;
  for (const Store& store : stores_) {
    lengths.push_back(static_cast<double>(store.episodes.size()));
    for (const auto& episode : store.episodes) {
      lengths.push_back(static_cast<double>(episode->size()));
      for (const Transition& tr : *episode) {
        rows.push_back(tr.object_id);
        rows.push_back(tr.step);
        rows.insert(rows.end(), tr.obs.begin(), tr.obs.end());
        rows.insert(rows.end(), tr.next_obs.begin(), tr.next_obs.end());
        rows.insert(rows.end(), tr.action.begin(), tr.action.end());
        PushQuat(rows, tr.achieved);
        PushQuat(rows, tr.goal);
        rows.push_back(tr.reward);
        rows.push_back(tr.done ? 1.0 : 0.0);
        PushSeed(rows, tr.cloud_seed);
        PushSeed(rows, tr.next_cloud_seed);
      }
    }
  }
  ckpt.arrays.push_back({"episode_lengths", std::move(lengths)});
  ckpt.arrays.push_back({"transitions", std::move(rows)});
  return ckpt;
}

EpisodeBuffer EpisodeBuffer::FromCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.component != "replay") {
    throw Error(ErrorCode::kFormat, "checkpoint holds '" + ckpt.component + "', not replay");
  }
  const nlohmann::json meta = nlohmann::json::parse(ckpt.meta_json);
  ReplayConfig config;
  config.capacity = meta.at("capacity").get<int>();
  config.relabel_k = meta.at("relabel_k").get<int>();
  config.success_threshold = meta.at("success_threshold").get<double>();
  EpisodeBuffer buffer(config, meta.at("num_objects").get<int>());
  const std::vector<double>& lengths = ckpt.GetArray("episode_lengths");
  const std::vector<double>& rows = ckpt.GetArray("transitions");
  std::size_t li = 0, ri = 0;
  auto take_length = [&] {
    if (li >= lengths.size()) throw Error(ErrorCode::kFormat, "replay snapshot truncated");
    return static_cast<std::size_t>(lengths[li++]);
  };
  for (Store& store : buffer.stores_) {
    const std::size_t count = take_length();
    for (std::size_t e = 0; e < count; ++e) {
      const std::size_t length = take_length();
      if (ri + length * kTransitionWidth > rows.size()) {
        throw Error(ErrorCode::kFormat, "replay snapshot truncated");
      }
      auto episode = std::make_shared<Episode>(length);
      for (Transition& tr : *episode) {
        const double* p = rows.data() + ri;
        tr.object_id = static_cast<int>(p[0]);
        tr.step = static_cast<int>(p[1]);
        p += 2;
        std::copy(p, p + kObservationDim, tr.obs.begin());
        p += kObservationDim;
        std::copy(p, p + kObservationDim, tr.next_obs.begin());
        p += kObservationDim;
        std::copy(p, p + kActionDim, tr.action.begin());
        p += kActionDim;
        tr.achieved = ReadQuat(p);
        tr.goal = ReadQuat(p + 4);
        p += 8;
        tr.reward = static_cast<int>(p[0]);
        tr.done = p[1] != 0.0;
        tr.cloud_seed = ReadSeed(p + 2);
        tr.next_cloud_seed = ReadSeed(p + 4);
        ri += kTransitionWidth;
      }
      store.episodes.push_back(std::move(episode));
    }
    Reindex(store);
  }
  if (ri != rows.size() || li != lengths.size()) {
    throw Error(ErrorCode::kFormat, "replay snapshot has trailing data");
  }
  buffer.insertions_ = meta.at("insertions").get<std::uint64_t>();
  return buffer;
}

}  // namespace geodex
