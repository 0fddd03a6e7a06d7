// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-object evaluation metrics.

#pragma once

#include <array>
#include <string>
#include <variant>

#include "sqkit/geometry.hpp"

namespace sqkit {

inline constexpr std::size_t kHandJoints = 21;

using JointSet = std::array<Vec3, kHandJoints>;

struct MetricReport {
  std::string name;
  double value = 0;
  std::string units;  // "mm", "mm^2" or "cm^3"
};

// Throws InputError unless the cloud has exactly 21 points.
JointSet joints_from_cloud(const PointCloud& cloud);

// Mean Euclidean distance over corresponding joints, mm.
double mepe(const JointSet& pred, const JointSet& gt);

// Symmetric mean of nearest-neighbour squared distances (mm^2), or of plain
// distances (mm) when `squared` is false.
double chamfer(const PointCloud& a, const PointCloud& b, bool squared = true);

// Same quantity by exhaustive search; reference for the k-d tree path.
double chamfer_brute_force(const PointCloud& a, const PointCloud& b,
                           bool squared = true);

using SolidObject = std::variant<Superquadric, TriangleMesh>;

// Largest distance from a hand vertex lying inside the object to the object
// surface, 0 when nothing penetrates. Superquadrics use the radial distance;
// meshes use the exact point-to-triangle distance and must be watertight.
double penetration_depth(const PointCloud& hand_vertices, const SolidObject& object);

// Volume of voxels occupied in both grids, cm^3. Grids must share voxel_size
// and have origins congruent modulo voxel_size.
double intersection_volume(const VoxelGrid& a, const VoxelGrid& b);

// L1 distance between canonicalized parameter vectors.
double theta_l1(const Superquadric& a, const Superquadric& b);

}  // namespace sqkit
