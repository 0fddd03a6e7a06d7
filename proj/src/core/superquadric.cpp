// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/superquadric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sqkit/error.hpp"

namespace sqkit {

double ScaleParams::min() const { return std::min({ax, ay, az}); }
double ScaleParams::max() const { return std::max({ax, ay, az}); }

namespace {

constexpr double kRotationTolerance = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

// A relabeling of the local axes: new axis k is sign[k] * old axis index[k].
struct Relabeling {
  std::array<int, 3> index;
  std::array<double, 3> sign;
  bool swap_eps;
};

Superquadric apply(const Superquadric& sq, const Relabeling& r) {
  Superquadric out = sq;
  const Vec3 scales = sq.scale.as_vector();
  for (int k = 0; k < 3; ++k) {
    out.pose.rotation.col(k) = r.sign[k] * sq.pose.rotation.col(r.index[k]);
  }
  out.scale = {scales[r.index[0]], scales[r.index[1]], scales[r.index[2]]};
  if (r.swap_eps) std::swap(out.shape.eps1, out.shape.eps2);
  return out;
}

// Relabelings that map the local z axis to +-z; all of them are exact
// symmetries of the implicit function.
constexpr std::array<Relabeling, 8> kSurfaceSymmetries = {{
    {{0, 1, 2}, {1, 1, 1}, false},
    {{1, 0, 2}, {1, -1, 1}, false},
    {{0, 1, 2}, {-1, -1, 1}, false},
    {{1, 0, 2}, {-1, 1, 1}, false},
    {{0, 1, 2}, {1, -1, -1}, false},
    {{0, 1, 2}, {-1, 1, -1}, false},
    {{1, 0, 2}, {1, 1, -1}, false},
    {{1, 0, 2}, {-1, -1, -1}, false},
}};

constexpr std::array<Relabeling, 4> kDualityRelabelings = {{
    {{0, 1, 2}, {1, 1, 1}, false},  // identity
    {{2, 0, 1}, {1, 1, 1}, true},   // old z becomes new x
    {{1, 2, 0}, {1, 1, 1}, true},   // old z becomes new y
    {{1, 0, 2}, {1, -1, 1}, false}, // quarter turn about z
}};

bool lexicographic_less(const ParamVector& a, const ParamVector& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return false;
}

}  // namespace

void validate(const Superquadric& sq) {
  const auto& s = sq.shape;
  if (!(s.eps1 >= kEpsMin && s.eps1 <= kEpsMax && s.eps2 >= kEpsMin &&
        s.eps2 <= kEpsMax)) {
    throw ContractError("shape exponents must lie in [0.1, 2.0], got eps1=" +
                        std::to_string(s.eps1) +
                        " eps2=" + std::to_string(s.eps2));
  }
  const auto& a = sq.scale;
  if (!(a.ax > 0 && a.ay > 0 && a.az > 0) || !finite(a.as_vector())) {
    throw ContractError("scales must be positive and finite");
  }
  const Mat3& r = sq.pose.rotation;
  if (!r.allFinite() || !finite(sq.pose.translation)) {
    throw ContractError("pose must be finite");
  }
  const double orth = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > kRotationTolerance ||
      std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw ContractError("rotation is not a proper orthonormal matrix");
  }
}

bool is_valid(const Superquadric& sq) noexcept {
  try {
    validate(sq);
    return true;
  } catch (...) {
    return false;
  }
}

Vec3 rotation_to_axis_angle(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  double angle = aa.angle();
  Vec3 axis = aa.axis();
  if (angle > std::numbers::pi) {
    angle = 2 * std::numbers::pi - angle;
    axis = -axis;
  }
  if (angle == 0.0) return Vec3::Zero();
  if (std::numbers::pi - angle < 1e-12) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-12) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    }
  }
  return angle * axis;
}

Mat3 axis_angle_to_rotation(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

ParamVector to_vector(const Superquadric& sq) {
  ParamVector v;
  const Vec3 r = rotation_to_axis_angle(sq.pose.rotation);
  v << sq.shape.eps1, sq.shape.eps2, sq.scale.ax, sq.scale.ay, sq.scale.az,
      r[0], r[1], r[2], sq.pose.translation[0], sq.pose.translation[1],
      sq.pose.translation[2];
  return v;
}

Superquadric from_vector(const ParamVector& v) {
  Superquadric sq;
  sq.shape = {v[0], v[1]};
  sq.scale = {v[2], v[3], v[4]};
  sq.pose.rotation = axis_angle_to_rotation(v.segment<3>(5));
  sq.pose.translation = v.segment<3>(8);
  return sq;
}

double gauge_local(const ShapeParams& shape, const ScaleParams& scale,
                   const Vec3& q) {
  const double u = std::abs(q.x() / scale.ax);
  const double v = std::abs(q.y() / scale.ay);
  const double w = std::abs(q.z() / scale.az);
  const double m = std::max({u, v, w});
  if (m == 0.0) return 0.0;
  const double e1 = shape.eps1, e2 = shape.eps2;
  const double xy = std::pow(u / m, 2.0 / e2) + std::pow(v / m, 2.0 / e2);
  const double normalized = std::pow(xy, e2 / e1) + std::pow(w / m, 2.0 / e1);
  return m * std::pow(normalized, e1 / 2.0);
}

double inside_outside_local(const ShapeParams& shape, const ScaleParams& scale,
                            const Vec3& q) {
  const double u = std::abs(q.x() / scale.ax);
  const double v = std::abs(q.y() / scale.ay);
  const double w = std::abs(q.z() / scale.az);
  const double m = std::max({u, v, w});
  if (m == 0.0) return 0.0;
  const double e1 = shape.eps1, e2 = shape.eps2;
  const double xy = std::pow(u / m, 2.0 / e2) + std::pow(v / m, 2.0 / e2);
  const double normalized = std::pow(xy, e2 / e1) + std::pow(w / m, 2.0 / e1);
  return std::pow(m, 2.0 / e1) * normalized;
}

double radial_residual_local(const ShapeParams& shape,
                             const ScaleParams& scale, const Vec3& q) {
  const double g = gauge_local(shape, scale, q);
  if (g == 0.0) return -scale.min();
  const double r = q.norm();
  return r - r / g;
}

double inside_outside(const Superquadric& sq, const Vec3& p) {
  return inside_outside_local(sq.shape, sq.scale, sq.pose.to_local(p));
}

double radial_distance(const Superquadric& sq, const Vec3& p) {
  return std::abs(radial_residual_local(sq.shape, sq.scale, sq.pose.to_local(p)));
}

std::array<Superquadric, 4> duality_candidates(const Superquadric& sq) {
  std::array<Superquadric, 4> out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = apply(sq, kDualityRelabelings[i]);
  }
  return out;
}

Superquadric canonicalize(const Superquadric& sq) {
  Superquadric best = sq;
  ParamVector best_key;
  bool first = true;
  for (const auto& r : kSurfaceSymmetries) {
    Superquadric candidate = apply(sq, r);
    const ParamVector key = to_vector(candidate);
    if (first || lexicographic_less(key, best_key)) {
      best = candidate;
      best_key = key;
      first = false;
    }
  }
  return best;
}

}  // namespace sqkit
