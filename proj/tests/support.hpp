// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the test binaries.

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "sqkit/geometry.hpp"
#include "sqkit/rng.hpp"
#include "sqkit/superquadric.hpp"

namespace sqtest {

using sqkit::Mat3;
using sqkit::Superquadric;
using sqkit::Vec3;

inline Superquadric make_sq(double e1, double e2, double ax, double ay, double az,
                            const Vec3& axis_angle = Vec3::Zero(),
                            const Vec3& t = Vec3::Zero()) {
  Superquadric sq;
  sq.shape = {e1, e2};
  sq.scale = {ax, ay, az};
  sq.pose.rotation = sqkit::axis_angle_to_rotation(axis_angle);
  sq.pose.translation = t;
  return sq;
}

inline Vec3 random_axis_angle(sqkit::Rng& rng) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  return axis.normalized() * rng.uniform(0.0, std::numbers::pi);
}

// eps in [0.3, 1.8], scales in [10, 50] mm, random pose.
inline Superquadric random_sq(sqkit::Rng& rng) {
  return make_sq(rng.uniform(0.3, 1.8), rng.uniform(0.3, 1.8), rng.uniform(10, 50),
                 rng.uniform(10, 50), rng.uniform(10, 50), random_axis_angle(rng),
                 Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100),
                      rng.uniform(-100, 100)));
}

// Surface function written out independently of the library.
inline double reference_f(double e1, double e2, const Vec3& a, const Vec3& q) {
  const double x = std::pow(std::abs(q.x() / a.x()), 2.0 / e2);
  const double y = std::pow(std::abs(q.y() / a.y()), 2.0 / e2);
  const double z = std::pow(std::abs(q.z() / a.z()), 2.0 / e1);
  return std::pow(x + y, e2 / e1) + z;
}

// Monte-Carlo volume of the axis-aligned solid centred at the origin.
inline double monte_carlo_volume(double e1, double e2, const Vec3& a, int samples,
                                 std::uint64_t seed) {
  sqkit::Rng rng(seed);
  int inside = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 q(rng.uniform(-a.x(), a.x()), rng.uniform(-a.y(), a.y()),
                 rng.uniform(-a.z(), a.z()));
    if (reference_f(e1, e2, a, q) < 1.0) ++inside;
  }
  return 8.0 * a.x() * a.y() * a.z() * inside / samples;
}

inline sqkit::TriangleMesh unit_cube(const Vec3& lo = Vec3::Zero(), double edge = 1.0) {
  sqkit::TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(lo + edge * Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  }
  // Outward-oriented, two triangles per face: -z, +z, -y, +y, -x, +x.
  m.faces = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
             {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return m;
}

struct NoisyCloud {
  sqkit::PointCloud cloud;  // inliers first, then outliers
  std::size_t inliers = 0;
};

// n surface samples with isotropic Gaussian noise, plus uniform outliers that
// make up `outlier_fraction` of the result, drawn from the clean samples'
// bounding box doubled about its centre.
inline NoisyCloud noisy_cloud(const Superquadric& gt, std::size_t n, std::uint64_t seed,
                              double noise, double outlier_fraction) {
  NoisyCloud out;
  out.cloud = sqkit::sample_surface(gt, n, seed);
  out.inliers = n;
  const sqkit::Aabb box = sqkit::bounding_box(out.cloud.points);
  const Vec3 centre = 0.5 * (box.min + box.max);
  const Vec3 extent = box.extent();
  sqkit::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (Vec3& p : out.cloud.points) p += noise * Vec3(rng.normal(), rng.normal(), rng.normal());
  const auto outliers = static_cast<std::size_t>(
      std::llround(outlier_fraction / (1.0 - outlier_fraction) * static_cast<double>(n)));
  for (std::size_t i = 0; i < outliers; ++i) {
    out.cloud.points.push_back(centre + Vec3(rng.uniform(-1, 1) * extent.x(),
                                             rng.uniform(-1, 1) * extent.y(),
                                             rng.uniform(-1, 1) * extent.z()));
  }
  return out;
}

// Mean radial distance from fresh ground-truth samples to the fitted surface.
inline double surface_error(const Superquadric& gt, const Superquadric& fitted,
                            std::size_t probes = 10000, std::uint64_t seed = 777) {
  double total = 0;
  const sqkit::PointCloud fresh = sqkit::sample_surface(gt, probes, seed);
  for (const Vec3& p : fresh.points) total += sqkit::radial_distance(fitted, p);
  return total / static_cast<double>(fresh.size());
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sqkit-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout. stderr is left alone unless the
// command redirects it.
inline RunResult run(const std::string& command) {
  RunResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace sqtest
