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

#include "geodex/rotmath.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geodex/error.h"

namespace geodex {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kGradClamp = 1.0 - 1e-7;

}  // namespace

UnitQuaternion UnitQuaternion::Normalize(double w, double x, double y,
                                         double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 1e-12)) {
    throw Error(ErrorCode::kZeroNorm, "quaternion norm <= 1e-12");
  }
  return {w / norm, x / norm, y / norm, z / norm};
}

UnitQuaternion UnitQuaternion::FromUnitComponents(double w, double x, double y,
                                                  double z, double tol) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(std::abs(norm - 1.0) <= tol)) {
    throw Error(ErrorCode::kNotARotation, "stored quaternion is not unit");
  }
  return {w, x, y, z};
}

UnitQuaternion UnitQuaternion::Normalize(std::span<const double, 4> raw) {
  return Normalize(raw[0], raw[1], raw[2], raw[3]);
}

UnitQuaternion UnitQuaternion::FromAxisAngle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 1e-12)) {
    throw Error(ErrorCode::kZeroNorm, "rotation axis has zero length");
  }
  const double s = std::sin(0.5 * angle) / n;
  return Normalize(std::cos(0.5 * angle), axis.x() * s, axis.y() * s,
                   axis.z() * s);
}

UnitQuaternion UnitQuaternion::FromRotationVector(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-12) {
    // First-order expansion; exact enough below the threshold.
    return Normalize(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z());
  }
  const double s = std::sin(0.5 * angle) / angle;
  return Normalize(std::cos(0.5 * angle), v.x() * s, v.y() * s, v.z() * s);
}

double UnitQuaternion::Dot(const UnitQuaternion& o) const {
  return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
}

UnitQuaternion UnitQuaternion::Canonical() const {
  return w_ < 0.0 ? Negated() : *this;
}

Vec3 UnitQuaternion::Rotate(const Vec3& v) const {
  return QuatToMatrix(*this).Apply(v);
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return UnitQuaternion::Normalize(
      a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
      a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
      a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
      a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

bool SameOrientation(const UnitQuaternion& a, const UnitQuaternion& b,
                     double tol) {
  double minus = 0.0;
  double plus = 0.0;
  const auto qa = a.ToArray();
  const auto qb = b.ToArray();
  for (int i = 0; i < 4; ++i) {
    minus += (qa[i] - qb[i]) * (qa[i] - qb[i]);
    plus += (qa[i] + qb[i]) * (qa[i] + qb[i]);
  }
  return std::sqrt(std::min(minus, plus)) < tol;
}

RotMat RotMat::FromMatrix(const Mat3& m, double tol) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= tol) || !(m.determinant() > 0.0)) {
    throw Error(ErrorCode::kNotARotation,
                "matrix is not a proper rotation (orthogonality error " +
                    std::to_string(ortho) + ")");
  }
  return RotMat(m, 0);
}

RotMat QuatToMatrix(const UnitQuaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return RotMat::FromMatrix(m, 1e-6);
}

UnitQuaternion MatrixToQuat(const RotMat& r) {
  const Mat3& m = r.matrix();
  const double trace = m.trace();
  // Shepperd: branch on the largest of (trace, diagonal) for stability.
  if (trace >= m(0, 0) && trace >= m(1, 1) && trace >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + trace);
    return UnitQuaternion::Normalize(0.25 * s, (m(2, 1) - m(1, 2)) / s,
                                     (m(0, 2) - m(2, 0)) / s,
                                     (m(1, 0) - m(0, 1)) / s);
  }
  if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    return UnitQuaternion::Normalize((m(2, 1) - m(1, 2)) / s, 0.25 * s,
                                     (m(0, 1) + m(1, 0)) / s,
                                     (m(0, 2) + m(2, 0)) / s);
  }
  if (m(1, 1) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    return UnitQuaternion::Normalize((m(0, 2) - m(2, 0)) / s,
                                     (m(0, 1) + m(1, 0)) / s, 0.25 * s,
                                     (m(1, 2) + m(2, 1)) / s);
  }
  const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
  return UnitQuaternion::Normalize((m(1, 0) - m(0, 1)) / s,
                                   (m(0, 2) + m(2, 0)) / s,
                                   (m(1, 2) + m(2, 1)) / s, 0.25 * s);
}

double GeodesicAngle(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double d = std::clamp(std::abs(a.Dot(b)), -1.0, 1.0);
  return 2.0 * std::acos(d);
}

double GeodesicAngle(const RotMat& a, const RotMat& b) {
  return GeodesicAngle(MatrixToQuat(a), MatrixToQuat(b));
}

RotationLossResult RotationLoss(const Mat3& predicted, const RotMat& target) {
  RotationLossResult out;
  const Mat3 diff = predicted - target.matrix();
  const double frob = diff.norm();
  const double arg = frob / (2.0 * kSqrt2);
  out.loss = 2.0 * std::asin(std::clamp(arg, 0.0, 1.0));
  if (frob > 0.0) {
    const double g = std::min(arg, kGradClamp);
    // d/dD 2 asin(|D|/(2 sqrt2)) = 2 / sqrt(1 - g^2) * D / (2 sqrt2 |D|)
    const double scale = 2.0 / std::sqrt(1.0 - g * g) / (2.0 * kSqrt2 * frob);
    out.grad = scale * diff;
  }
  return out;
}

UnitQuaternion RandomRotationZ(Rng& rng) {
  const double angle = 2.0 * std::numbers::pi * Uniform01(rng);
  return UnitQuaternion::Normalize(std::cos(0.5 * angle), 0.0, 0.0,
                                   std::sin(0.5 * angle));
}

UnitQuaternion RandomRotationSO3(Rng& rng) {
  for (;;) {
    const double w = StandardNormal(rng);
    const double x = StandardNormal(rng);
    const double y = StandardNormal(rng);
    const double z = StandardNormal(rng);
    if (w * w + x * x + y * y + z * z > 1e-12) {
      return UnitQuaternion::Normalize(w, x, y, z);
    }
  }
}

namespace {

struct GramSchmidt {
  Vec3 a1, a2, b1, b2, b3, u;
  double n1 = 0.0;
  double nu = 0.0;
};

GramSchmidt RunGramSchmidt(std::span<const double, 6> raw) {
  GramSchmidt gs;
  gs.a1 = Vec3(raw[0], raw[1], raw[2]);
  gs.a2 = Vec3(raw[3], raw[4], raw[5]);
  gs.n1 = gs.a1.norm();
  if (!(gs.n1 > 1e-9)) {
    throw Error(ErrorCode::kDegenerate, "first rotation column has norm <= 1e-9");
  }
  gs.b1 = gs.a1 / gs.n1;
  gs.u = gs.a2 - gs.b1.dot(gs.a2) * gs.b1;
  gs.nu = gs.u.norm();
  if (!(gs.nu > 1e-9)) {
    throw Error(ErrorCode::kDegenerate,
                "second rotation column is parallel to the first");
  }
  gs.b2 = gs.u / gs.nu;
  gs.b3 = gs.b1.cross(gs.b2);
  return gs;
}

}  // namespace

RotMat ProjectToSO3(std::span<const double, 6> raw) {
  const GramSchmidt gs = RunGramSchmidt(raw);
  Mat3 m;
  m.col(0) = gs.b1;
  m.col(1) = gs.b2;
  m.col(2) = gs.b3;
  return RotMat::FromMatrix(m, 1e-6);
}

std::array<double, 6> ProjectToSO3Backward(std::span<const double, 6> raw,
                                           const Mat3& grad_rotation) {
  const GramSchmidt gs = RunGramSchmidt(raw);
  const Vec3 g3 = grad_rotation.col(2);
  Vec3 gb1 = grad_rotation.col(0) + gs.b2.cross(g3);
  const Vec3 gb2 = grad_rotation.col(1) + g3.cross(gs.b1);
  const Vec3 gu = (gb2 - gs.b2 * gs.b2.dot(gb2)) / gs.nu;
  const Vec3 ga2 = gu - gs.b1 * gs.b1.dot(gu);
  gb1 -= gs.b1.dot(gs.a2) * gu + gs.a2 * gs.b1.dot(gu);
  const Vec3 ga1 = (gb1 - gs.b1 * gs.b1.dot(gb1)) / gs.n1;
  return {ga1.x(), ga1.y(), ga1.z(), ga2.x(), ga2.y(), ga2.z()};
}

}  // namespace geodex
