// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "sqkit/error.hpp"
#include "sqkit/rng.hpp"

namespace sqkit {

namespace {

constexpr double kPi = std::numbers::pi;

// Resolution of the parametric mesh used as the proposal for surface sampling.
constexpr int kSamplingResolution = 64;

// Clears the rounding residue of cos/sin at multiples of pi/2; sgn(t)|t|^eps
// would otherwise turn a stray 1e-16 into a visible offset for small eps.
double snapped(double v) { return std::abs(v) < 1e-14 ? 0.0 : v; }

double signed_pow(double base, double e) {
  return std::copysign(std::pow(std::abs(base), e), base);
}

Vec3 parametric_point(const ShapeParams& shape, const ScaleParams& scale,
                      double cos_eta, double sin_eta, double cos_omega,
                      double sin_omega) {
  const double ring = signed_pow(cos_eta, shape.eps1);
  return {scale.ax * ring * signed_pow(cos_omega, shape.eps2),
          scale.ay * ring * signed_pow(sin_omega, shape.eps2),
          scale.az * signed_pow(sin_eta, shape.eps1)};
}

// Builds the parametric mesh in the local frame.
TriangleMesh make_local_mesh(const ShapeParams& shape, const ScaleParams& scale,
                             int resolution) {
  const int rings = resolution - 1;
  const int segments = 2 * resolution;
  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(rings) * segments + 2);
  for (int r = 0; r < rings; ++r) {
    const double eta = -kPi / 2 + kPi * (r + 1) / resolution;
    const double ce = snapped(std::cos(eta)), se = snapped(std::sin(eta));
    for (int s = 0; s < segments; ++s) {
      const double omega = -kPi + kPi * s / resolution;
      mesh.vertices.push_back(parametric_point(shape, scale, ce, se,
                                               snapped(std::cos(omega)),
                                               snapped(std::sin(omega))));
    }
  }
  const auto south = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back({0.0, 0.0, -scale.az});
  const auto north = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back({0.0, 0.0, scale.az});

  auto vid = [segments](int r, int s) {
    return static_cast<std::uint32_t>(r * segments + (s % segments));
  };
  mesh.faces.reserve(static_cast<std::size_t>(2) * segments * rings);
  for (int s = 0; s < segments; ++s) {
    mesh.faces.push_back({south, vid(0, s + 1), vid(0, s)});
  }
  for (int r = 0; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      mesh.faces.push_back({vid(r, s), vid(r, s + 1), vid(r + 1, s + 1)});
      mesh.faces.push_back({vid(r, s), vid(r + 1, s + 1), vid(r + 1, s)});
    }
  }
  for (int s = 0; s < segments; ++s) {
    mesh.faces.push_back({vid(rings - 1, s), vid(rings - 1, s + 1), north});
  }
  return mesh;
}

Vec3 gauge_gradient(const ShapeParams& shape, const ScaleParams& scale,
                    const Vec3& q) {
  const double h = 1e-6 * q.norm();
  Vec3 grad;
  for (int i = 0; i < 3; ++i) {
    Vec3 plus = q, minus = q;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (gauge_local(shape, scale, plus) - gauge_local(shape, scale, minus)) /
              (2 * h);
  }
  return grad;
}

// Area magnification of the radial projection x -> x / g(x) from the plane of
// a triangle with unit normal n onto the surface.
double projection_jacobian(const ShapeParams& shape, const ScaleParams& scale,
                           const Vec3& x, const Vec3& n) {
  const double g = gauge_local(shape, scale, x);
  const Vec3 y = x / g;
  const Vec3 dir = x.normalized();
  const Vec3 grad = gauge_gradient(shape, scale, y);
  const double cos_surface = std::abs(grad.normalized().dot(dir));
  const double cos_plane = std::abs(n.dot(dir));
  if (cos_surface <= 0.0) return 0.0;
  return (1.0 / (g * g)) * cos_plane / cos_surface;
}

Vec3 sample_barycentric(Rng& rng, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double r1 = std::sqrt(rng.uniform());
  const double r2 = rng.uniform();
  return (1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c;
}

std::size_t pick_weighted(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  auto idx = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

VoxelGrid make_snapped_grid(const Aabb& box, double voxel_size) {
  if (!(voxel_size > 0) || !std::isfinite(voxel_size)) {
    throw ContractError("voxel_size must be positive");
  }
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  double total = 1.0;
  for (int d = 0; d < 3; ++d) {
    const double lo = std::floor(box.min[d] / voxel_size);
    const double hi = std::ceil(box.max[d] / voxel_size);
    grid.origin[d] = lo * voxel_size;
    grid.dims[d] = std::max(1, static_cast<int>(hi - lo));
    total *= grid.dims[d];
  }
  if (total > 2e9) throw ContractError("voxel grid too large");
  grid.occupancy.assign(static_cast<std::size_t>(total), 0);
  return grid;
}

// Crossings of the line {(s, y, z)} with a set of triangles. Returns false
// when the line passes through an edge or vertex within tolerance, in which
// case the caller perturbs (y, z) and retries.
bool line_crossings(const TriangleMesh& mesh,
                    const std::vector<std::uint32_t>& triangles, double y,
                    double z, double tolerance, std::vector<double>& xs) {
  xs.clear();
  auto orient = [y, z](const Vec3& u, const Vec3& v) {
    return (v.y() - u.y()) * (z - u.z()) - (v.z() - u.z()) * (y - u.y());
  };
  for (const std::uint32_t t : triangles) {
    const Face& f = mesh.faces[t];
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const double d0 = orient(b, c), d1 = orient(c, a), d2 = orient(a, b);
    const double area = d0 + d1 + d2;
    if (std::abs(area) <= tolerance) continue;  // parallel to the line
    const bool all_pos = d0 > tolerance && d1 > tolerance && d2 > tolerance;
    const bool all_neg = d0 < -tolerance && d1 < -tolerance && d2 < -tolerance;
    if (all_pos || all_neg) {
      xs.push_back((d0 * a.x() + d1 * b.x() + d2 * c.x()) / area);
      continue;
    }
    const bool some_pos = d0 > tolerance || d1 > tolerance || d2 > tolerance;
    const bool some_neg = d0 < -tolerance || d1 < -tolerance || d2 < -tolerance;
    if (!(some_pos && some_neg)) return false;  // on an edge or vertex
  }
  std::sort(xs.begin(), xs.end());
  return true;
}

// Deterministic perturbation sequence for degenerate lines.
constexpr int kMaxJitter = 32;
Eigen::Vector2d jitter_offset(int attempt, double unit) {
  const double a = std::fmod(0.7548776662466927 * attempt, 1.0) - 0.5;
  const double b = std::fmod(0.5698402909980532 * attempt, 1.0) - 0.5;
  return {a * unit * attempt, b * unit * attempt};
}

void robust_crossings(const TriangleMesh& mesh,
                      const std::vector<std::uint32_t>& triangles, double y,
                      double z, double tolerance, double jitter_unit,
                      std::vector<double>& xs) {
  if (line_crossings(mesh, triangles, y, z, tolerance, xs)) return;
  for (int attempt = 1; attempt <= kMaxJitter; ++attempt) {
    const Eigen::Vector2d o = jitter_offset(attempt, jitter_unit);
    if (line_crossings(mesh, triangles, y + o.x(), z + o.y(), tolerance, xs)) {
      return;
    }
  }
  throw AlgorithmError("ray parity failed: every perturbed ray was degenerate");
}

double mesh_tolerance(const TriangleMesh& mesh) {
  const Aabb box = bounding_box(mesh.vertices);
  const double l = std::max(box.extent().maxCoeff(), 1e-300);
  return 1e-12 * l * l;
}

void require_watertight(const TriangleMesh& mesh) {
  if (!is_watertight(mesh)) {
    throw ContractError("mesh not watertight; run resample/repair");
  }
}

}  // namespace

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(occupancy.begin(), occupancy.end(),
                    [](std::uint8_t v) { return v != 0; }));
}

double VoxelGrid::occupied_volume() const {
  return static_cast<double>(occupied_count()) * voxel_size * voxel_size *
         voxel_size;
}

void validate(const PointCloud& cloud) {
  for (const Vec3& p : cloud.points) {
    if (!p.allFinite()) throw ContractError("point cloud contains non-finite coordinates");
  }
  if (!cloud.weights.empty()) {
    if (cloud.weights.size() != cloud.points.size()) {
      throw ContractError("weights must match the number of points");
    }
    bool positive = false;
    for (double w : cloud.weights) {
      if (!(w >= 0) || !std::isfinite(w)) throw ContractError("weights must be non-negative");
      positive = positive || w > 0;
    }
    if (!positive) throw ContractError("at least one weight must be positive");
  }
}

void validate(const TriangleMesh& mesh) {
  const auto n = mesh.vertices.size();
  for (const Vec3& v : mesh.vertices) {
    if (!v.allFinite()) throw ContractError("mesh contains non-finite vertices");
  }
  for (const Face& f : mesh.faces) {
    if (f[0] >= n || f[1] >= n || f[2] >= n) {
      throw ContractError("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ContractError("degenerate face with a repeated vertex index");
    }
  }
}

Aabb bounding_box(const std::vector<Vec3>& points) {
  Aabb box{Vec3::Constant(0.0), Vec3::Constant(0.0)};
  if (points.empty()) return box;
  box.min = box.max = points.front();
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

Aabb bounding_box(const Superquadric& sq) {
  const Vec3 half = sq.pose.rotation.cwiseAbs() * sq.scale.as_vector();
  return {sq.pose.translation - half, sq.pose.translation + half};
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0;
  for (const Face& f : mesh.faces) {
    area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]],
                          mesh.vertices[f[2]]);
  }
  return area;
}

double enclosed_volume(const TriangleMesh& mesh) {
  double volume = 0;
  for (const Face& f : mesh.faces) {
    volume += mesh.vertices[f[0]].dot(
        mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  return volume / 6.0;
}

PointCloud sample_surface(const Superquadric& sq, std::size_t n,
                          std::uint64_t seed) {
  validate(sq);
  if (n == 0) throw ContractError("sample count must be at least 1");
  const TriangleMesh local =
      make_local_mesh(sq.shape, sq.scale, kSamplingResolution);

  std::vector<double> cumulative;
  std::vector<Vec3> normals;
  cumulative.reserve(local.faces.size());
  normals.reserve(local.faces.size());
  double total = 0;
  double bound = 0;
  for (const Face& f : local.faces) {
    const Vec3& a = local.vertices[f[0]];
    const Vec3& b = local.vertices[f[1]];
    const Vec3& c = local.vertices[f[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double area = 0.5 * cross.norm();
    total += area;
    cumulative.push_back(total);
    normals.push_back(area > 0 ? Vec3(cross.normalized()) : Vec3::Zero());
    if (area > 0) {
      bound = std::max(bound, projection_jacobian(sq.shape, sq.scale,
                                                  (a + b + c) / 3.0,
                                                  normals.back()));
    }
  }
  // Centroid values underestimate the maximum slightly near sharp edges.
  bound *= 1.5;

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  while (cloud.points.size() < n) {
    const std::size_t t = pick_weighted(cumulative, rng.uniform());
    const Face& f = local.faces[t];
    const Vec3 x = sample_barycentric(rng, local.vertices[f[0]],
                                      local.vertices[f[1]], local.vertices[f[2]]);
    const double accept = rng.uniform() * bound;
    if (accept >= projection_jacobian(sq.shape, sq.scale, x, normals[t])) {
      continue;
    }
    const Vec3 on_surface = x / gauge_local(sq.shape, sq.scale, x);
    cloud.points.push_back(sq.pose.to_world(on_surface));
  }
  return cloud;
}

TriangleMesh make_mesh(const Superquadric& sq, int resolution) {
  validate(sq);
  if (resolution < 4) throw ContractError("mesh resolution must be at least 4");
  TriangleMesh mesh = make_local_mesh(sq.shape, sq.scale, resolution);
  for (Vec3& v : mesh.vertices) v = sq.pose.to_world(v);
  return mesh;
}

bool is_watertight(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) return false;
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.faces.size() * 3);
  auto key = [](std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  for (const Face& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      ++directed[key(f[e], f[(e + 1) % 3])];
    }
  }
  for (const auto& [k, count] : directed) {
    if (count != 1) return false;
    const auto a = static_cast<std::uint32_t>(k >> 32);
    const auto b = static_cast<std::uint32_t>(k & 0xffffffffu);
    auto reverse = directed.find(key(b, a));
    if (reverse == directed.end() || reverse->second != 1) return false;
  }
  return true;
}

PointCloud resample_mesh(const TriangleMesh& mesh, std::size_t n,
                         std::uint64_t seed) {
  validate(mesh);
  if (n == 0) throw ContractError("sample count must be at least 1");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0;
  for (const Face& f : mesh.faces) {
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]],
                           mesh.vertices[f[2]]);
    cumulative.push_back(total);
  }
  if (!(total > 0)) throw AlgorithmError("zero-area mesh");

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Zero-area faces never win: upper_bound skips equal cumulative values.
    const std::size_t t = pick_weighted(cumulative, rng.uniform());
    const Face& f = mesh.faces[t];
    cloud.points.push_back(sample_barycentric(
        rng, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
  }
  return cloud;
}

VoxelGrid voxelize_mesh(const TriangleMesh& mesh, double voxel_size,
                        const std::optional<Aabb>& bounds) {
  validate(mesh);
  require_watertight(mesh);
  VoxelGrid grid =
      make_snapped_grid(bounds ? *bounds : bounding_box(mesh.vertices), voxel_size);
  const int ny = grid.dims[1], nz = grid.dims[2];
  const double vs = voxel_size;

  // Bucket triangles by the rows whose centre line may cross them.
  std::vector<std::vector<std::uint32_t>> rows(static_cast<std::size_t>(ny) * nz);
  for (std::uint32_t t = 0; t < mesh.faces.size(); ++t) {
    const Face& f = mesh.faces[t];
    Vec3 lo = mesh.vertices[f[0]], hi = lo;
    for (int c = 1; c < 3; ++c) {
      lo = lo.cwiseMin(mesh.vertices[f[c]]);
      hi = hi.cwiseMax(mesh.vertices[f[c]]);
    }
    const int j0 = std::max(0, static_cast<int>(std::ceil((lo.y() - grid.origin.y()) / vs - 0.5)) - 1);
    const int j1 = std::min(ny - 1, static_cast<int>(std::floor((hi.y() - grid.origin.y()) / vs - 0.5)) + 1);
    const int k0 = std::max(0, static_cast<int>(std::ceil((lo.z() - grid.origin.z()) / vs - 0.5)) - 1);
    const int k1 = std::min(nz - 1, static_cast<int>(std::floor((hi.z() - grid.origin.z()) / vs - 0.5)) + 1);
    for (int k = k0; k <= k1; ++k) {
      for (int j = j0; j <= j1; ++j) {
        rows[static_cast<std::size_t>(k) * ny + j].push_back(t);
      }
    }
  }

  const double tolerance = mesh_tolerance(mesh);
  const double jitter_unit = 1e-5 * vs;
  std::vector<double> xs;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const auto& tris = rows[static_cast<std::size_t>(k) * ny + j];
      if (tris.empty()) continue;
      const Vec3 c0 = grid.center(0, j, k);
      robust_crossings(mesh, tris, c0.y(), c0.z(), tolerance, jitter_unit, xs);
      std::size_t below = 0;
      for (int i = 0; i < grid.dims[0]; ++i) {
        const double x = grid.origin.x() + (i + 0.5) * vs;
        while (below < xs.size() && xs[below] < x) ++below;
        if (below % 2 == 1) grid.occupancy[grid.index(i, j, k)] = 1;
      }
    }
  }
  return grid;
}

VoxelGrid voxelize_superquadric(const Superquadric& sq, double voxel_size,
                                const std::optional<Aabb>& bounds) {
  validate(sq);
  VoxelGrid grid = make_snapped_grid(bounds ? *bounds : bounding_box(sq), voxel_size);
  const double vs = voxel_size;
  const int nx = grid.dims[0];
  const Vec3 direction = sq.pose.rotation.transpose() * Vec3::UnitX();
  const double s_min = grid.origin.x();
  const double s_max = grid.origin.x() + nx * vs;

  auto inside_at = [&](const Vec3& base, int i) {
    const double s = grid.origin.x() + (i + 0.5) * vs;
    return inside_outside_local(sq.shape, sq.scale, base + s * direction) < 1.0;
  };

  // The gauge is convex along any line, so the inside part of each row is an
  // interval: locate its ends, then settle voxels near the ends exactly.
  for (int k = 0; k < grid.dims[2]; ++k) {
    for (int j = 0; j < grid.dims[1]; ++j) {
      const Vec3 c0 = grid.center(0, j, k);
      const Vec3 base = sq.pose.to_local(Vec3(0.0, c0.y(), c0.z()));
      auto gauge = [&](double s) {
        return gauge_local(sq.shape, sq.scale, base + s * direction);
      };

      double a = s_min, b = s_max;
      const double phi = (std::sqrt(5.0) - 1) / 2;
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double g1 = gauge(x1), g2 = gauge(x2);
      for (int it = 0; it < 80 && b - a > 1e-9 * vs; ++it) {
        if (g1 < g2) {
          b = x2; x2 = x1; g2 = g1;
          x1 = b - phi * (b - a); g1 = gauge(x1);
        } else {
          a = x1; x1 = x2; g1 = g2;
          x2 = a + phi * (b - a); g2 = gauge(x2);
        }
      }
      const double s_star = 0.5 * (a + b);
      auto settle = [&](int i) {
        if (i >= 0 && i < nx && inside_at(base, i)) {
          grid.occupancy[grid.index(i, j, k)] = 1;
        }
      };
      const int i_star = static_cast<int>(std::floor((s_star - s_min) / vs));
      for (int i = i_star - 1; i <= i_star + 1; ++i) settle(i);
      if (gauge(s_star) >= 1.0) continue;

      auto root = [&](double inside, double outside) {
        for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-9 * vs; ++it) {
          const double mid = 0.5 * (inside + outside);
          (gauge(mid) < 1.0 ? inside : outside) = mid;
        }
        return 0.5 * (inside + outside);
      };
      const double lo = gauge(s_min) < 1.0 ? s_min - vs : root(s_star, s_min);
      const double hi = gauge(s_max) < 1.0 ? s_max + vs : root(s_star, s_max);
      const int i_lo = static_cast<int>(std::floor((lo - s_min) / vs - 0.5));
      const int i_hi = static_cast<int>(std::ceil((hi - s_min) / vs - 0.5));
      for (int i = std::max(0, i_lo + 2); i <= std::min(nx - 1, i_hi - 2); ++i) {
        grid.occupancy[grid.index(i, j, k)] = 1;
      }
      for (int i = i_lo - 1; i <= i_lo + 2; ++i) settle(i);
      for (int i = i_hi - 2; i <= i_hi + 1; ++i) settle(i);
    }
  }
  return grid;
}

bool point_inside_mesh(const TriangleMesh& mesh, const Vec3& p) {
  std::vector<std::uint32_t> all(mesh.faces.size());
  for (std::uint32_t t = 0; t < all.size(); ++t) all[t] = t;
  std::vector<double> xs;
  const Aabb box = bounding_box(mesh.vertices);
  robust_crossings(mesh, all, p.y(), p.z(), mesh_tolerance(mesh),
                   1e-7 * std::max(box.extent().maxCoeff(), 1e-300), xs);
  const auto beyond = std::count_if(xs.begin(), xs.end(),
                                    [&](double x) { return x > p.x(); });
  return beyond % 2 == 1;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace sqkit
