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

#include "geodex/env.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "geodex/error.h"

namespace geodex {

namespace {

Mat3 Skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Matrix<double, 3, kActionDim> MakeTorqueMap(std::uint64_t seed, double tau_max) {
  // Redraw in the (never observed) case of a rank-deficient draw.
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(DeriveSeed(seed, 31, attempt));
    Eigen::Matrix<double, 3, kActionDim> m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < kActionDim; ++c) m(r, c) = StandardNormal(rng);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    if (svd.singularValues().minCoeff() > 0.5) {
      return m * (tau_max / std::sqrt(static_cast<double>(kActionDim)));
    }
  }
}

}  // namespace

std::string_view GoalModeName(GoalMode mode) {
  return mode == GoalMode::kZAxis ? "z-axis" : "so3";
}

GoalMode GoalModeFromName(std::string_view name) {
  if (name == "z-axis" || name == "z") return GoalMode::kZAxis;
  if (name == "so3") return GoalMode::kSO3;
  throw Error(ErrorCode::kConfig, "unknown goal mode '" + std::string(name) + "'");
}

void ValidateEnvConfig(const EnvConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfig, std::string("env: ") + what);
  };
  require(c.tau_max > 0 && std::isfinite(c.tau_max), "tau_max must be positive");
  require(c.damping >= 0 && std::isfinite(c.damping), "damping must be non-negative");
  require(c.mass > 0, "mass must be positive");
  require(c.episode_length >= 1, "episode_length must be >= 1");
  require(c.dt > 0, "dt must be positive");
  require(c.position_noise_variance >= 0, "position_noise_variance must be non-negative");
  require(c.success_threshold > 0, "success_threshold must be positive");
  require(c.cloud_points >= 1, "cloud_points must be >= 1");
}

ObjectRecord MakeObjectRecord(const Mesh& mesh, double mass) {
  ObjectRecord record;
  record.name = mesh.name();
  record.mesh = mesh;
  record.mass = mass;
  record.inertia = InertiaTensor(mesh, mass);
  return record;
}

int ComputeReward(const UnitQuaternion& achieved, const UnitQuaternion& goal, double threshold) {
  return GeodesicAngle(achieved, goal) <= threshold ? 1 : 0;
}

Vec3 IntegrateAngularVelocity(const Mat3& inertia, const Vec3& omega, const Vec3& torque,
                              double damping, double dt) {
  const Mat3 lhs = inertia / dt + damping * Mat3::Identity();
  const Vec3 rhs_const = inertia * omega / dt + torque;
  Vec3 x = omega;
  for (int iter = 0; iter < 50; ++iter) {
    const Vec3 mid = 0.5 * (omega + x);
    const Vec3 momentum = inertia * mid;
    const Vec3 residual = lhs * x + mid.cross(momentum) - rhs_const;
    const Mat3 jacobian = lhs + 0.5 * (Skew(mid) * inertia - Skew(momentum));
    const Vec3 delta = jacobian.partialPivLu().solve(residual);
    x -= delta;
    if (delta.norm() <= 1e-15 * std::max(1.0, x.norm())) break;
  }
  return x;
}

double RotationalEnergy(const Mat3& inertia, const Vec3& omega) {
  return 0.5 * omega.dot(inertia * omega);
}

Env::Env(const EnvConfig& config, std::vector<ObjectRecord> objects)
    : config_(config),
      objects_(std::make_shared<const std::vector<ObjectRecord>>(std::move(objects))),
      torque_map_(MakeTorqueMap(config.torque_map_seed, config.tau_max)) {
  ValidateEnvConfig(config_);
  for (const ObjectRecord& record : *objects_) {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(record.inertia);
    if ((record.inertia - record.inertia.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * record.inertia.norm() ||
        eig.eigenvalues().minCoeff() <= 0.0) {
      throw Error(ErrorCode::kBadSpec,
                  "inertia of '" + record.name + "' is not symmetric positive definite");
    }
  }
}

const ObjectRecord& Env::object(int id) const {
  if (id < 0 || id >= num_objects()) {
    throw Error(ErrorCode::kUnknownObject, "object id " + std::to_string(id));
  }
  return (*objects_)[id];
}

EnvState Env::Reset(int object_id, GoalMode goal_mode, Rng& rng) const {
  const ObjectRecord& record = object(object_id);
  EnvState state;
  state.object_id = object_id;
  state.inertia = record.inertia;
  const double sigma = std::sqrt(config_.position_noise_variance);
  for (int k = 0; k < 3; ++k) {
    state.position[k] = config_.rest_position[k] + sigma * StandardNormal(rng);
  }
  auto draw = [&] {
    return goal_mode == GoalMode::kZAxis ? RandomRotationZ(rng) : RandomRotationSO3(rng);
  };
  state.orientation = draw();
  state.goal = draw();
  return state;
}

Vec3 Env::Torque(const Action& action) const {
  Eigen::Matrix<double, kActionDim, 1> a;
  for (int i = 0; i < kActionDim; ++i) a[i] = std::clamp(action[i], -1.0, 1.0);
  Vec3 tau = torque_map_ * a;
  for (int k = 0; k < 3; ++k) tau[k] = std::clamp(tau[k], -config_.tau_max, config_.tau_max);
  return tau;
}

StepResult Env::Step(const EnvState& state, const Action& action) const {
  if (state.step >= config_.episode_length) {
    throw Error(ErrorCode::kEpisodeOver, "episode already has " +
                                             std::to_string(config_.episode_length) + " steps");
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw Error(ErrorCode::kNonFiniteAction, "action has non-finite entry");
  }
  StepResult out;
  EnvState& next = out.state;
  next = state;
  const Vec3 torque = Torque(action);
  next.omega = IntegrateAngularVelocity(state.inertia, state.omega, torque, config_.damping,
                                        config_.dt);
  if (next.omega != Vec3::Zero()) {
    next.orientation =
        state.orientation * UnitQuaternion::FromRotationVector(next.omega * config_.dt);
    const auto q = next.orientation.ToArray();
    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (std::abs(norm - 1.0) >= 1e-9) {
      throw Error(ErrorCode::kNotARotation, "orientation drifted off the unit sphere");
    }
  }
  for (int i = 0; i < kActionDim; ++i) {
    const double a = std::clamp(action[i], -1.0, 1.0);
    next.joint_rates[i] = a - state.joints[i];
    next.joints[i] = a;
  }
  next.step = state.step + 1;
  out.reward = ComputeReward(next.orientation, next.goal, config_.success_threshold);
  out.done = next.step == config_.episode_length;
  return out;
}

PointCloud Env::LocalCloud(int object_id, std::uint64_t cloud_seed) const {
  Rng rng(cloud_seed);
  return SampleSurface(object(object_id).mesh, config_.cloud_points, rng);
}

void Env::PairedClouds(int object_id, std::uint64_t cloud_seed,
                       const UnitQuaternion& orientation, const UnitQuaternion& goal,
                       PointCloud* current, PointCloud* goal_cloud) const {
  const PointCloud local = LocalCloud(object_id, cloud_seed);
  *current = local.Rotated(QuatToMatrix(orientation));
  *goal_cloud = local.Rotated(QuatToMatrix(goal));
}

Observation Env::Observe(const EnvState& state, bool include_cloud, Rng& rng) const {
  Observation obs;
  for (int i = 0; i < kActionDim; ++i) {
    obs.proprio[i] = state.joints[i];
    obs.proprio[kActionDim + i] = state.joint_rates[i];
  }
  const auto q = state.orientation.Canonical().ToArray();
  for (int k = 0; k < 3; ++k) {
    obs.object[k] = state.position[k];
    obs.object[7 + k] = state.velocity[k];
    obs.object[10 + k] = state.omega[k];
  }
  for (int k = 0; k < 4; ++k) obs.object[3 + k] = q[k];
  obs.goal = state.goal;
  // The seed is drawn either way so the stream does not depend on whether
  // clouds are materialized.
  obs.cloud_seed = rng();
  if (include_cloud) {
    PointCloud current, goal;
    PairedClouds(state.object_id, obs.cloud_seed, state.orientation, state.goal, &current, &goal);
    obs.current_cloud = std::move(current);
    obs.goal_cloud = std::move(goal);
  }
  return obs;
}

std::array<double, kObservationDim> Observation::Flat() const {
  std::array<double, kObservationDim> flat;
  std::copy(proprio.begin(), proprio.end(), flat.begin());
  std::copy(object.begin(), object.end(), flat.begin() + kProprioDim);
  return flat;
}

UnitQuaternion ObservedOrientation(std::span<const double, kObservationDim> flat) {
  const double* q = flat.data() + kProprioDim + 3;
  return UnitQuaternion::FromUnitComponents(q[0], q[1], q[2], q[3]);
}

void WriteEpisodeLog(std::ostream& out, const std::vector<Action>& actions,
                     const std::vector<EnvState>& states, const std::vector<int>& rewards) {
  if (actions.size() != states.size() || actions.size() != rewards.size()) {
    throw Error(ErrorCode::kLengthMismatch, "episode log columns differ in length");
  }
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const auto q = states[t].orientation.ToArray();
    nlohmann::json row;
    row["step"] = t;
    row["action"] = actions[t];
    row["orientation"] = q;
    row["reward"] = rewards[t];
    out << row.dump() << '\n';
  }
}

std::vector<Action> ReadEpisodeActions(std::string_view jsonl) {
  std::vector<Action> actions;
  std::size_t start = 0;
  int line = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line;
    const std::string_view text = jsonl.substr(start, end - start);
    start = end + 1;
    if (text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const nlohmann::json row = nlohmann::json::parse(text);
      actions.push_back(row.at("action").get<Action>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "episode log line " + std::to_string(line) + ": " +
                                              e.what());
    }
  }
  return actions;
}

}  // namespace geodex
