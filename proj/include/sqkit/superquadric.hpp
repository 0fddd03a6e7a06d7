// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Superquadric value types and the implicit inside-outside function.
//
// A superquadric is described by two shape exponents (eps1, eps2), three
// positive semi-axis lengths and a rigid pose. In its local frame the solid is
//
//   f(x, y, z) = (|x/ax|^(2/eps2) + |y/ay|^(2/eps2))^(eps2/eps1)
//                + |z/az|^(2/eps1)  <=  1
//
// Only the convex family is supported, so both exponents are kept inside
// [kEpsMin, kEpsMax]. Lengths are millimetres throughout.

#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sqkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Exponents below 0.1 push 2/eps past 20 and overflow quickly.
inline constexpr double kEpsMin = 0.1;
inline constexpr double kEpsMax = 2.0;

struct ShapeParams {
  double eps1 = 1.0;
  double eps2 = 1.0;
};

struct ScaleParams {
  double ax = 1.0;
  double ay = 1.0;
  double az = 1.0;

  Vec3 as_vector() const { return {ax, ay, az}; }
  double min() const;
  double max() const;
  double mean() const { return (ax + ay + az) / 3.0; }
};

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_local(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  Vec3 to_world(const Vec3& q) const { return rotation * q + translation; }
};

struct Superquadric {
  ShapeParams shape;
  ScaleParams scale;
  Pose pose;
};

// (eps1, eps2, ax, ay, az, rx, ry, rz, tx, ty, tz); the rotation is stored as
// an axis-angle vector in radians.
using ParamVector = Eigen::Matrix<double, 11, 1>;

// Throws ContractError when any invariant of the value types is broken.
void validate(const Superquadric& sq);
bool is_valid(const Superquadric& sq) noexcept;

// Axis-angle conversion. The angle is kept in [0, pi]; at exactly pi the
// axis sign is fixed so that its first non-zero component is positive.
Vec3 rotation_to_axis_angle(const Mat3& rotation);
Mat3 axis_angle_to_rotation(const Vec3& axis_angle);

ParamVector to_vector(const Superquadric& sq);
Superquadric from_vector(const ParamVector& v);

// Local-frame evaluation. `gauge_local` is f^(eps1/2), which is positively
// homogeneous of degree one and is computed without overflowing for points far
// from the surface.
double inside_outside_local(const ShapeParams& shape, const ScaleParams& scale,
                            const Vec3& q);
double gauge_local(const ShapeParams& shape, const ScaleParams& scale,
                   const Vec3& q);

// Signed distance from q to the surface along the ray through the local
// origin; positive outside. Returns -min(scale) at the origin itself.
double radial_residual_local(const ShapeParams& shape,
                             const ScaleParams& scale, const Vec3& q);

double inside_outside(const Superquadric& sq, const Vec3& p);

// |radial_residual_local| of p mapped into the local frame. At the local
// origin this is min(ax, ay, az) by convention.
double radial_distance(const Superquadric& sq, const Vec3& p);

// The switching search set: identity, z-onto-x and z-onto-y relabelings (with
// eps1/eps2 swapped and scales permuted), and the quarter turn about z that
// swaps ax and ay. Only the first and last describe the same surface in
// general; the other two are restart points.
std::array<Superquadric, 4> duality_candidates(const Superquadric& sq);

// Chooses, among the eight axis relabelings that keep the local z axis on
// itself (up to sign) and therefore leave the surface unchanged, the one with
// the lexicographically smallest parameter vector.
Superquadric canonicalize(const Superquadric& sq);

}  // namespace sqkit
