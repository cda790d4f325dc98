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

#ifndef GEODEX_ROTMATH_H_
#define GEODEX_ROTMATH_H_

#include <array>
#include <span>

#include <Eigen/Dense>

#include "geodex/random.h"

namespace geodex {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Orientation as a unit quaternion (w, x, y, z), Hamilton convention.
// Instances are always normalized; q and -q describe the same orientation.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;

  // Throws kZeroNorm when the raw 4-vector has norm <= 1e-12.
  static UnitQuaternion Normalize(double w, double x, double y, double z);
  static UnitQuaternion Normalize(std::span<const double, 4> raw);
  // Keeps the components bit for bit; throws kNotARotation unless the norm
  // is within tol of one.
  static UnitQuaternion FromUnitComponents(double w, double x, double y, double z,
                                           double tol = 1e-9);
  static UnitQuaternion FromAxisAngle(const Vec3& axis, double angle);
  // Exponential map of a rotation vector (axis * angle).
  static UnitQuaternion FromRotationVector(const Vec3& rotation_vector);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  std::array<double, 4> ToArray() const { return {w_, x_, y_, z_}; }

  double Dot(const UnitQuaternion& other) const;
  UnitQuaternion Conjugate() const { return {w_, -x_, -y_, -z_}; }
  UnitQuaternion Negated() const { return {-w_, -x_, -y_, -z_}; }
  // Representative with w >= 0.
  UnitQuaternion Canonical() const;
  Vec3 Rotate(const Vec3& v) const;

  // Hamilton product, renormalized.
  friend UnitQuaternion operator*(const UnitQuaternion& a,
                                  const UnitQuaternion& b);

 private:
  UnitQuaternion(double w, double x, double y, double z)
      : w_(w), x_(x), y_(y), z_(z) {}

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

// min(|q1 - q2|, |q1 + q2|) < tol.
bool SameOrientation(const UnitQuaternion& a, const UnitQuaternion& b,
                     double tol = 1e-9);

// Proper rotation matrix. Construction validates R^T R = I and det R = 1.
class RotMat {
 public:
  RotMat() : m_(Mat3::Identity()) {}

  // Throws kNotARotation if |R^T R - I| exceeds tol (max-abs entry) or the
  // determinant is not positive.
  static RotMat FromMatrix(const Mat3& m, double tol = 1e-4);
  static RotMat Identity() { return RotMat(); }

  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }
  RotMat Transpose() const { return RotMat(m_.transpose(), 0); }
  Vec3 Apply(const Vec3& v) const { return m_ * v; }

  friend RotMat operator*(const RotMat& a, const RotMat& b) {
    return RotMat(a.m_ * b.m_, 0);
  }

 private:
  RotMat(const Mat3& m, int /*unchecked*/) : m_(m) {}
  Mat3 m_;
};

RotMat QuatToMatrix(const UnitQuaternion& q);
UnitQuaternion MatrixToQuat(const RotMat& r);

// Rotation angle between two orientations, in [0, pi].
double GeodesicAngle(const UnitQuaternion& a, const UnitQuaternion& b);
double GeodesicAngle(const RotMat& a, const RotMat& b);

struct RotationLossResult {
  double loss = 0.0;  // radians
  Mat3 grad = Mat3::Zero();  // d loss / d predicted
};

// loss = 2 asin(|predicted - target|_F / (2 sqrt 2)). The asin argument is
// clamped to [0, 1] for the value and to [0, 1 - 1e-7] for the derivative.
// At predicted == target the (sub)gradient is zero.
RotationLossResult RotationLoss(const Mat3& predicted, const RotMat& target);

UnitQuaternion RandomRotationZ(Rng& rng);
// Haar-uniform rotation: normalized 4-vector of independent standard normals.
UnitQuaternion RandomRotationSO3(Rng& rng);

// Gram-Schmidt map from a raw 6-vector (two 3-vectors a1, a2) to a rotation
// whose columns are b1 = a1/|a1|, b2 = orthonormalized a2, b3 = b1 x b2.
// Throws kDegenerate when |a1| <= 1e-9 or the orthogonal residual of a2 is
// <= 1e-9.
RotMat ProjectToSO3(std::span<const double, 6> raw);

// Vector-Jacobian product of ProjectToSO3: given d loss / d R, returns
// d loss / d raw.
std::array<double, 6> ProjectToSO3Backward(std::span<const double, 6> raw,
                                           const Mat3& grad_rotation);

}  // namespace geodex

#endif  // GEODEX_ROTMATH_H_
