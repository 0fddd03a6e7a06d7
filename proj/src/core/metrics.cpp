// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqkit/error.hpp"
#include "sqkit/kdtree.hpp"

namespace sqkit {

namespace {

// Mean nearest-neighbour term from each point of `from` into `tree`.
double directed_term(const PointCloud& from, const KdTree& tree, bool squared) {
  double sum = 0;
  for (const Vec3& p : from.points) {
    const double d2 = tree.nearest(p).squared_distance;
    sum += squared ? d2 : std::sqrt(d2);
  }
  return sum / static_cast<double>(from.size());
}

double directed_term_brute(const PointCloud& from, const PointCloud& to,
                           bool squared) {
  double sum = 0;
  for (const Vec3& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to.points) best = std::min(best, squared_distance(p, q));
    sum += squared ? best : std::sqrt(best);
  }
  return sum / static_cast<double>(from.size());
}

void check_pair(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw ContractError("chamfer needs two non-empty clouds");
  validate(a);
  validate(b);
}

double mesh_surface_distance(const TriangleMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Face& f : mesh.faces) {
    const Vec3 c = closest_point_on_triangle(p, mesh.vertices[f[0]],
                                             mesh.vertices[f[1]], mesh.vertices[f[2]]);
    best = std::min(best, squared_distance(p, c));
  }
  return std::sqrt(best);
}

}  // namespace

JointSet joints_from_cloud(const PointCloud& cloud) {
  if (cloud.size() != kHandJoints) {
    throw InputError("joint file must hold exactly 21 joints, got " +
                     std::to_string(cloud.size()));
  }
  JointSet joints;
  std::copy(cloud.points.begin(), cloud.points.end(), joints.begin());
  return joints;
}

double mepe(const JointSet& pred, const JointSet& gt) {
  double sum = 0;
  for (std::size_t i = 0; i < kHandJoints; ++i) sum += (pred[i] - gt[i]).norm();
  return sum / static_cast<double>(kHandJoints);
}

double chamfer(const PointCloud& a, const PointCloud& b, bool squared) {
  check_pair(a, b);
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  return directed_term(a, tree_b, squared) + directed_term(b, tree_a, squared);
}

double chamfer_brute_force(const PointCloud& a, const PointCloud& b, bool squared) {
  check_pair(a, b);
  return directed_term_brute(a, b, squared) + directed_term_brute(b, a, squared);
}

double penetration_depth(const PointCloud& hand_vertices, const SolidObject& object) {
  validate(hand_vertices);
  double depth = 0;
  if (const auto* sq = std::get_if<Superquadric>(&object)) {
    validate(*sq);
    for (const Vec3& p : hand_vertices.points) {
      if (inside_outside(*sq, p) < 1.0) depth = std::max(depth, radial_distance(*sq, p));
    }
    return depth;
  }
  const auto& mesh = std::get<TriangleMesh>(object);
  validate(mesh);
  if (!is_watertight(mesh)) {
    throw ContractError("mesh not watertight; inside test undefined");
  }
  const Aabb box = bounding_box(mesh.vertices);
  for (const Vec3& p : hand_vertices.points) {
    if ((p.array() < box.min.array()).any() || (p.array() > box.max.array()).any()) {
      continue;
    }
    if (point_inside_mesh(mesh, p)) {
      depth = std::max(depth, mesh_surface_distance(mesh, p));
    }
  }
  return depth;
}

double intersection_volume(const VoxelGrid& a, const VoxelGrid& b) {
  const double vs = a.voxel_size;
  if (!(vs > 0) || std::abs(a.voxel_size - b.voxel_size) > 1e-12 * vs) {
    throw ContractError("incompatible grids: voxel sizes differ");
  }
  std::array<long, 3> shift{};  // index of b's origin in a's lattice
  for (int d = 0; d < 3; ++d) {
    const double offset = (b.origin[d] - a.origin[d]) / vs;
    const double rounded = std::round(offset);
    if (std::abs(offset - rounded) > 1e-6) {
      throw ContractError("incompatible grids: origins are not aligned");
    }
    shift[d] = static_cast<long>(rounded);
  }
  std::array<long, 3> lo{}, hi{};
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::max(0L, shift[d]);
    hi[d] = std::min<long>(a.dims[d], shift[d] + b.dims[d]);
    if (lo[d] >= hi[d]) return 0.0;
  }
  std::size_t both = 0;
  for (long k = lo[2]; k < hi[2]; ++k) {
    for (long j = lo[1]; j < hi[1]; ++j) {
      for (long i = lo[0]; i < hi[0]; ++i) {
        if (a.occupied(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) &&
            b.occupied(static_cast<int>(i - shift[0]), static_cast<int>(j - shift[1]),
                       static_cast<int>(k - shift[2]))) {
          ++both;
        }
      }
    }
  }
  return static_cast<double>(both) * vs * vs * vs / 1000.0;
}

double theta_l1(const Superquadric& a, const Superquadric& b) {
  validate(a);
  validate(b);
  return (to_vector(canonicalize(a)) - to_vector(canonicalize(b))).lpNorm<1>();
}

}  // namespace sqkit
