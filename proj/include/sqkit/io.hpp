// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// File formats: ASCII OBJ (read/write), ASCII PLY (read), and plain `x y z`
// point lists. All readers throw InputError on malformed content.

#pragma once

#include <iosfwd>
#include <string>

#include "sqkit/geometry.hpp"

namespace sqkit {

// Polygonal faces are fan-triangulated on read. Only `v` and `f` records are
// interpreted; `f` entries may use the `i/t/n` form and negative indices.
TriangleMesh read_obj(std::istream& in);
void write_obj(std::ostream& out, const TriangleMesh& mesh);

// ASCII 1.0 only; binary files are rejected.
TriangleMesh read_ply(std::istream& in);

PointCloud read_xyz(std::istream& in);
void write_xyz(std::ostream& out, const PointCloud& cloud);

// Dispatch on file extension (.obj, .ply; anything else for clouds is xyz).
TriangleMesh load_mesh(const std::string& path);
void save_obj(const std::string& path, const TriangleMesh& mesh);
// A .ply or .obj path yields its vertices; other extensions are read as xyz.
PointCloud load_cloud(const std::string& path);
void save_xyz(const std::string& path, const PointCloud& cloud);

bool has_mesh_extension(const std::string& path);

}  // namespace sqkit
