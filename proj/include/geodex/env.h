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

#ifndef GEODEX_ENV_H_
#define GEODEX_ENV_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "geodex/mesh.h"
#include "geodex/random.h"
#include "geodex/rotmath.h"

namespace geodex {

inline constexpr int kActionDim = 20;
// Virtual joint positions and velocities of the 20-actuator rig.
inline constexpr int kProprioDim = 2 * kActionDim;
// Position, quaternion, linear velocity, angular velocity.
inline constexpr int kObjectStateDim = 13;
inline constexpr int kGoalDim = 4;
// Policy observation width without geometry features.
inline constexpr int kObservationDim = kProprioDim + kObjectStateDim;

using Action = std::array<double, kActionDim>;

enum class GoalMode { kZAxis, kSO3 };
std::string_view GoalModeName(GoalMode mode);
GoalMode GoalModeFromName(std::string_view name);  // throws kConfig

struct EnvConfig {
  double tau_max = 0.005;       // N m, per torque component
  double damping = 0.001;       // N m s
  double mass = 0.2;            // kg, used when an object has no mass of its own
  int episode_length = 50;
  double dt = 1.0 / 25.0;       // s
  double position_noise_variance = 5e-5;  // m^2, per coordinate
  double success_threshold = 0.1;         // rad
  int cloud_points = 128;
  std::uint64_t torque_map_seed = 20;
  std::array<double, 3> rest_position = {0.0, 0.0, 0.0};
};

// Throws kConfig describing the first invalid field.
void ValidateEnvConfig(const EnvConfig& config);

// A normalized object ready for simulation.
struct ObjectRecord {
  std::string name;
  Mesh mesh;
  double mass = 0.2;
  Mat3 inertia = Mat3::Identity();  // body frame, about the AABB center
};

// Builds a record from a mesh already at hand scale; inertia from geometry.
ObjectRecord MakeObjectRecord(const Mesh& mesh, double mass);

struct EnvState {
  int object_id = 0;
  UnitQuaternion orientation;
  Vec3 omega = Vec3::Zero();  // body frame, rad/s
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  UnitQuaternion goal;
  int step = 0;
  Mat3 inertia = Mat3::Identity();
  Action joints{};       // last applied action
  Action joint_rates{};  // change of the applied action over the last step
};

struct Observation {
  std::array<double, kProprioDim> proprio{};
  std::array<double, kObjectStateDim> object{};
  UnitQuaternion goal;
  // Seed of the surface sample behind the clouds; the same sample rotated to
  // the current and goal orientations gives the paired clouds.
  std::uint64_t cloud_seed = 0;
  std::optional<PointCloud> current_cloud;
  std::optional<PointCloud> goal_cloud;

  // Proprioception followed by object state.
  std::array<double, kObservationDim> Flat() const;
};

// Orientation stored in a flat observation (object state slots 3..6).
UnitQuaternion ObservedOrientation(std::span<const double, kObservationDim> flat);

struct StepResult {
  EnvState state;
  int reward = 0;
  bool done = false;
};

// 1 iff the geodesic angle between the orientations is within `threshold`.
int ComputeReward(const UnitQuaternion& achieved, const UnitQuaternion& goal,
                  double threshold = 0.1);

// Torque-driven rigid-body attitude proxy. The 20-dim action maps through a
// fixed seeded 3 x 20 matrix to a body torque, clamped per component. All
// methods are const and safe to call concurrently.
class Env {
 public:
  Env(const EnvConfig& config, std::vector<ObjectRecord> objects);

  const EnvConfig& config() const { return config_; }
  int num_objects() const { return static_cast<int>(objects_->size()); }
  const ObjectRecord& object(int id) const;
  const Eigen::Matrix<double, 3, kActionDim>& torque_map() const { return torque_map_; }

  // Initial and goal orientations are drawn independently. Throws
  // kUnknownObject.
  EnvState Reset(int object_id, GoalMode goal_mode, Rng& rng) const;
  // Throws kEpisodeOver and kNonFiniteAction. Actions are clamped to [-1, 1].
  StepResult Step(const EnvState& state, const Action& action) const;
  Vec3 Torque(const Action& action) const;

  // With `include_cloud`, draws a fresh surface sample seed from `rng`.
  Observation Observe(const EnvState& state, bool include_cloud, Rng& rng) const;
  // Object-frame surface sample for a cloud seed.
  PointCloud LocalCloud(int object_id, std::uint64_t cloud_seed) const;
  // Paired clouds: the local sample rotated to `orientation` and to `goal`.
  void PairedClouds(int object_id, std::uint64_t cloud_seed, const UnitQuaternion& orientation,
                    const UnitQuaternion& goal, PointCloud* current, PointCloud* goal_cloud) const;

 private:
  EnvConfig config_;
  std::shared_ptr<const std::vector<ObjectRecord>> objects_;
  Eigen::Matrix<double, 3, kActionDim> torque_map_;
};

// Body-frame angular velocity after one step of
//   I (w' - w) / dt = tau - w_m x I w_m - c w',  w_m = (w + w') / 2,
// solved by Newton iteration. Damping is implicit so it stays stable when
// c dt exceeds the inertia, and the midpoint gyroscopic term keeps torque-free
// kinetic energy and angular momentum magnitude exact.
Vec3 IntegrateAngularVelocity(const Mat3& inertia, const Vec3& omega, const Vec3& torque,
                              double damping, double dt);

double RotationalEnergy(const Mat3& inertia, const Vec3& omega);

// Episode log: one JSON object per line with step, action, orientation
// (w, x, y, z) and reward.
void WriteEpisodeLog(std::ostream& out, const std::vector<Action>& actions,
                     const std::vector<EnvState>& states, const std::vector<int>& rewards);
// Reads back the action column of an episode log.
std::vector<Action> ReadEpisodeActions(std::string_view jsonl);

}  // namespace geodex

#endif  // GEODEX_ENV_H_
