// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Point clouds, triangle meshes and voxel grids, plus the operations that
// move between them and superquadrics.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sqkit/superquadric.hpp"

namespace sqkit {

struct PointCloud {
  std::vector<Vec3> points;
  // Empty, or one non-negative weight per point.
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  double volume() const {
    const Vec3 e = extent();
    return e.x() * e.y() * e.z();
  }
};

struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 1.0;
  std::array<int, 3> dims = {0, 0, 0};
  std::vector<std::uint8_t> occupancy;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  bool occupied(int i, int j, int k) const { return occupancy[index(i, j, k)] != 0; }
  Vec3 center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  std::size_t occupied_count() const;
  double occupied_volume() const;  // mm^3
};

void validate(const PointCloud& cloud);
void validate(const TriangleMesh& mesh);

Aabb bounding_box(const std::vector<Vec3>& points);
Aabb bounding_box(const Superquadric& sq);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriangleMesh& mesh);
// Signed enclosed volume; positive for outward-oriented closed meshes.
double enclosed_volume(const TriangleMesh& mesh);

// n points distributed uniformly by area over the surface. Candidates are drawn
// from a fine parametric mesh and pushed radially onto the exact surface; the
// radial push distorts density, which is undone by rejection against the
// projection Jacobian.
PointCloud sample_surface(const Superquadric& sq, std::size_t n,
                          std::uint64_t seed);

// Closed mesh over a resolution x (2 resolution) grid of (eta, omega) with a
// single apex vertex at each pole. Requires resolution >= 4.
TriangleMesh make_mesh(const Superquadric& sq, int resolution);

// Every undirected edge is used by exactly two faces which traverse it in
// opposite directions. Several closed components are fine.
bool is_watertight(const TriangleMesh& mesh);

// Area-weighted triangle choice followed by uniform barycentric sampling.
PointCloud resample_mesh(const TriangleMesh& mesh, std::size_t n,
                         std::uint64_t seed);

// Parity of crossings along +x from each voxel centre. The grid origin is an
// integer multiple of voxel_size. Throws ContractError for open meshes.
VoxelGrid voxelize_mesh(const TriangleMesh& mesh, double voxel_size,
                        const std::optional<Aabb>& bounds = std::nullopt);

VoxelGrid voxelize_superquadric(const Superquadric& sq, double voxel_size,
                                const std::optional<Aabb>& bounds = std::nullopt);

// Ray-parity inside test for a single point against a watertight mesh.
bool point_inside_mesh(const TriangleMesh& mesh, const Vec3& p);

// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

}  // namespace sqkit
