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

#include <atomic>
#include <functional>
#include <map>
#include <thread>

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

// A random-walk episode whose rewards match its goal.
Episode MakeEpisode(int object_id, int length, Rng& rng) {
  const UnitQuaternion goal = RandomRotationSO3(rng);
  UnitQuaternion q = RandomRotationSO3(rng);
  Episode episode;
  for (int t = 0; t < length; ++t) {
    Transition tr;
    tr.object_id = object_id;
    tr.step = t;
    for (double& v : tr.obs) v = Uniform01(rng);
    for (double& v : tr.next_obs) v = Uniform01(rng);
    for (double& v : tr.action) v = 2 * Uniform01(rng) - 1;
    q = UnitQuaternion::FromRotationVector(Vec3(0.3 * Uniform01(rng), 0.2, -0.1)) * q;
    tr.achieved = q;
    tr.goal = goal;
    tr.reward = ComputeReward(tr.achieved, tr.goal);
    tr.done = t + 1 == length;
    tr.cloud_seed = rng();
    tr.next_cloud_seed = rng();
    episode.push_back(tr);
  }
  return episode;
}

bool SameTransition(const Transition& a, const Transition& b) {
  return a.object_id == b.object_id && a.step == b.step && a.obs == b.obs &&
         a.next_obs == b.next_obs && a.action == b.action &&
         a.achieved.ToArray() == b.achieved.ToArray() && a.goal.ToArray() == b.goal.ToArray() &&
         a.reward == b.reward && a.done == b.done && a.cloud_seed == b.cloud_seed &&
         a.next_cloud_seed == b.next_cloud_seed;
}

TEST(EpisodeBufferTest, NoRelabelReturnsStoredTransitionsVerbatim) {
  Rng rng(1);
  EpisodeBuffer buffer({.capacity = 10, .relabel_k = 0}, 1);
  const Episode episode = MakeEpisode(0, 12, rng);
  buffer.Insert(episode);
  for (const SampledTransition& s : buffer.Sample(200, rng)) {
    EXPECT_FALSE(s.relabeled);
    EXPECT_TRUE(SameTransition(s.transition, episode[s.transition.step]));
  }
}

TEST(EpisodeBufferTest, CapacityEvictsOldestFirst) {
  Rng rng(2);
  EpisodeBuffer buffer({.capacity = 2}, 1);
  const Episode first = MakeEpisode(0, 5, rng);
  const Episode second = MakeEpisode(0, 5, rng);
  const Episode third = MakeEpisode(0, 5, rng);
  buffer.Insert(first);
  buffer.Insert(second);
  buffer.Insert(third);
  EXPECT_EQ(buffer.num_episodes(0), 2u);
  EXPECT_EQ(buffer.insertions(), 3u);
  const auto stored = buffer.Episodes(0);
  EXPECT_EQ(stored[0]->front().cloud_seed, second.front().cloud_seed);
  EXPECT_EQ(stored[1]->front().cloud_seed, third.front().cloud_seed);
}

TEST(EpisodeBufferTest, RejectsMalformedEpisodes) {
  Rng rng(3);
  EpisodeBuffer buffer({}, 2);
  EXPECT_EQ(CodeOf([&] { buffer.Insert({}); }), ErrorCode::kMalformedEpisode);
  Episode mixed = MakeEpisode(0, 4, rng);
  mixed[2].object_id = 1;
  EXPECT_EQ(CodeOf([&] { buffer.Insert(mixed); }), ErrorCode::kMalformedEpisode);
  Episode gap = MakeEpisode(0, 4, rng);
  gap[3].step = 4;
  EXPECT_EQ(CodeOf([&] { buffer.Insert(gap); }), ErrorCode::kMalformedEpisode);
  EXPECT_EQ(CodeOf([&] { buffer.Insert(MakeEpisode(2, 4, rng)); }),
            ErrorCode::kMalformedEpisode);
  Episode lying = MakeEpisode(0, 4, rng);
  lying[1].reward = 1 - lying[1].reward;
  EXPECT_EQ(CodeOf([&] { buffer.Insert(lying); }), ErrorCode::kMalformedEpisode);
  EXPECT_EQ(buffer.num_transitions(), 0u);
}

TEST(EpisodeBufferTest, EmptyBufferThrows) {
  Rng rng(4);
  EpisodeBuffer buffer({}, 2);
  EXPECT_EQ(CodeOf([&] { buffer.Sample(1, rng); }), ErrorCode::kEmptyBuffer);
  buffer.Insert(MakeEpisode(0, 3, rng));
  EXPECT_EQ(CodeOf([&] { buffer.SampleObject(1, 1, rng); }), ErrorCode::kEmptyBuffer);
  EXPECT_EQ(buffer.SampleObject(0, 5, rng).size(), 5u);
}

TEST(EpisodeBufferTest, RelabelToOwnAchievedGivesReward) {
  Rng rng(5);
  EpisodeBuffer buffer({.relabel_k = 4}, 1);
  // Length one forces the future index to the transition itself.
  Episode episode = MakeEpisode(0, 1, rng);
  ASSERT_EQ(episode[0].reward, 0);
  buffer.Insert(episode);
  int relabeled = 0;
  for (const SampledTransition& s : buffer.Sample(100, rng)) {
    if (!s.relabeled) continue;
    ++relabeled;
    EXPECT_EQ(s.transition.reward, 1);
    EXPECT_EQ(s.transition.goal.ToArray(), episode[0].achieved.ToArray());
  }
  EXPECT_GT(relabeled, 0);
}

TEST(EpisodeBufferTest, RelabeledFractionMatchesRatio) {
  Rng rng(6);
  EpisodeBuffer buffer({.relabel_k = 4}, 1);
  for (int e = 0; e < 5; ++e) buffer.Insert(MakeEpisode(0, 20, rng));
  const int n = 100000;
  int relabeled = 0;
  for (const SampledTransition& s : buffer.Sample(n, rng)) relabeled += s.relabeled;
  const double p = 0.8;
  EXPECT_NEAR(relabeled / static_cast<double>(n), p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(EpisodeBufferTest, RewardsConsistentAndGoalsFromFuture) {
  Rng rng(7);
  EpisodeBuffer buffer({.capacity = 50, .relabel_k = 4, .success_threshold = 0.5}, 2);
  // A large threshold makes both reward values common.
  for (int e = 0; e < 10; ++e) {
    Episode episode = MakeEpisode(e % 2, 15, rng);
    for (Transition& tr : episode) tr.reward = ComputeReward(tr.achieved, tr.goal, 0.5);
    buffer.Insert(episode);
  }
  int ones = 0;
  for (const SampledTransition& s : buffer.Sample(20000, rng)) {
    const Transition& tr = s.transition;
    ASSERT_EQ(tr.reward, ComputeReward(tr.achieved, tr.goal, 0.5));
    ones += tr.reward;
    if (!s.relabeled) continue;
    // Locate the source episode by its cloud seed and confirm the goal is a
    // future achieved orientation of that episode.
    bool found = false;
    for (const auto& episode : buffer.Episodes(tr.object_id)) {
      if ((*episode)[tr.step].cloud_seed != tr.cloud_seed) continue;
      for (std::size_t f = tr.step; f < episode->size() && !found; ++f) {
        found = (*episode)[f].achieved.ToArray() == tr.goal.ToArray();
      }
    }
    ASSERT_TRUE(found);
  }
  EXPECT_GT(ones, 0);
}

TEST(EpisodeBufferTest, SamplingIsUniformOverTransitions) {
  Rng rng(8);
  EpisodeBuffer buffer({.relabel_k = 0}, 3);
  // Unequal episode lengths across objects: 3 + 5 + 8 + 4 = 20 transitions.
  buffer.Insert(MakeEpisode(0, 3, rng));
  buffer.Insert(MakeEpisode(1, 5, rng));
  buffer.Insert(MakeEpisode(2, 8, rng));
  buffer.Insert(MakeEpisode(0, 4, rng));
  std::map<std::uint64_t, int> counts;
  const int n = 40000;
  for (const SampledTransition& s : buffer.Sample(n, rng)) ++counts[s.transition.cloud_seed];
  ASSERT_EQ(counts.size(), 20u);
  const double expected = n / 20.0;
  double chi2 = 0;
  for (const auto& [seed, count] : counts) {
    chi2 += (count - expected) * (count - expected) / expected;
  }
  EXPECT_LT(chi2, 36.191);  // chi-square 0.99 quantile, 19 dof
}

TEST(EpisodeBufferTest, SampleObjectStaysWithinObject) {
  Rng rng(9);
  EpisodeBuffer buffer({}, 3);
  for (int id = 0; id < 3; ++id) buffer.Insert(MakeEpisode(id, 6, rng));
  for (const SampledTransition& s : buffer.SampleObject(1, 300, rng)) {
    EXPECT_EQ(s.transition.object_id, 1);
  }
}

TEST(EpisodeBufferTest, SeededSamplingIsDeterministic) {
  Rng rng(10);
  EpisodeBuffer buffer({}, 2);
  for (int e = 0; e < 6; ++e) buffer.Insert(MakeEpisode(e % 2, 10, rng));
  Rng a(77), b(77);
  const auto first = buffer.Sample(500, a);
  const auto second = buffer.Sample(500, b);
  for (std::size_t i = 0; i < first.size(); ++i) {
    ASSERT_TRUE(SameTransition(first[i].transition, second[i].transition));
  }
}

TEST(EpisodeBufferTest, SnapshotRoundTripsExactly) {
  Rng rng(11);
  EpisodeBuffer buffer({.capacity = 3, .relabel_k = 2}, 3);
  for (int e = 0; e < 8; ++e) buffer.Insert(MakeEpisode(e % 2, 4 + e, rng));
  const std::string bytes = SerializeCheckpoint(buffer.ToCheckpoint());
  const EpisodeBuffer loaded = EpisodeBuffer::FromCheckpoint(ParseCheckpoint(bytes));
  EXPECT_EQ(loaded.config().capacity, 3);
  EXPECT_EQ(loaded.config().relabel_k, 2);
  EXPECT_EQ(loaded.insertions(), buffer.insertions());
  EXPECT_EQ(loaded.num_transitions(), buffer.num_transitions());
  EXPECT_EQ(SerializeCheckpoint(loaded.ToCheckpoint()), bytes);
  Rng a(5), b(5);
  const auto original = buffer.Sample(300, a);
  const auto reloaded = loaded.Sample(300, b);
  for (std::size_t i = 0; i < original.size(); ++i) {
    ASSERT_TRUE(SameTransition(original[i].transition, reloaded[i].transition));
  }
}

TEST(EpisodeBufferTest, SnapshotRejectsOtherComponentsAndTruncation) {
  Rng rng(12);
  EpisodeBuffer buffer({}, 1);
  buffer.Insert(MakeEpisode(0, 4, rng));
  Checkpoint ckpt = buffer.ToCheckpoint();
  Checkpoint other = ckpt;
  other.component = "agent";
  EXPECT_EQ(CodeOf([&] { EpisodeBuffer::FromCheckpoint(other); }), ErrorCode::kFormat);
  for (auto& entry : ckpt.arrays) {
    if (entry.name == "transitions") entry.values.resize(entry.values.size() - 1);
  }
  EXPECT_EQ(CodeOf([&] { EpisodeBuffer::FromCheckpoint(ckpt); }), ErrorCode::kFormat);
}

TEST(EpisodeBufferTest, ConcurrentInsertAndSampleSeeWholeEpisodes) {
  EpisodeBuffer buffer({.capacity = 20, .relabel_k = 4}, 4);
  {
    Rng rng(13);
    buffer.Insert(MakeEpisode(0, 10, rng));
  }
  std::atomic<bool> stop{false};
  std::vector<std::thread> producers;
  for (int id = 0; id < 4; ++id) {
    producers.emplace_back([&buffer, id] {
      Rng rng(100 + id);
      for (int e = 0; e < 60; ++e) buffer.Insert(MakeEpisode(id, 10, rng));
    });
  }
  std::thread consumer([&] {
    Rng rng(14);
    while (!stop) {
      for (const SampledTransition& s : buffer.Sample(64, rng)) {
        const Transition& tr = s.transition;
        ASSERT_EQ(tr.reward, ComputeReward(tr.achieved, tr.goal));
        ASSERT_LT(tr.step, 10);
      }
    }
  });
  for (auto& t : producers) t.join();
  stop = true;
  consumer.join();
  for (int id = 0; id < 4; ++id) EXPECT_EQ(buffer.num_episodes(id), 20u);
  EXPECT_EQ(buffer.insertions(), 241u);
}

}  // namespace
}  // namespace geodex
