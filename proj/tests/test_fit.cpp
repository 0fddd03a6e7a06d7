// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sqkit/error.hpp"
#include "sqkit/fit.hpp"
#include "support.hpp"

using namespace sqkit;
using sqtest::make_sq;

namespace {

PointCloud cloud_of(std::vector<Vec3> points) {
  PointCloud c;
  c.points = std::move(points);
  return c;
}

bool non_decreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("initialize") {
  const PointCloud sphere = sample_surface(make_sq(1, 1, 1, 1, 1, Vec3::Zero(), {10, 0, 0}), 2000, 1);
  const Superquadric init = initialize(sphere, ParamBounds::for_cloud(sphere));
  CHECK((init.pose.translation - Vec3(10, 0, 0)).norm() < 0.5);

  std::vector<Vec3> corners;
  for (int rep = 0; rep < 2; ++rep) {
    for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1 ? 3 : -3, i & 2 ? 2 : -2, i & 4 ? 1 : -1);
  }
  const PointCloud box = cloud_of(corners);
  const Superquadric b = initialize(box, ParamBounds::for_cloud(box));
  std::array<double, 3> scales = {b.scale.ax, b.scale.ay, b.scale.az};
  std::sort(scales.begin(), scales.end());
  CHECK(scales[0] >= 1 - 1e-9);
  CHECK(scales[1] >= 2 - 1e-9);
  CHECK(scales[2] >= 3 - 1e-9);

  const PointCloud ten = cloud_of(std::vector<Vec3>(sphere.points.begin(), sphere.points.begin() + 10));
  CHECK_THROWS_WITH_AS(initialize(ten, ParamBounds{}), doctest::Contains("underdetermined"),
                       AlgorithmError);

  std::vector<Vec3> plane;
  for (int i = 0; i < 50; ++i) plane.emplace_back(i % 7, i / 7, 0);
  CHECK_THROWS_WITH_AS(initialize(cloud_of(plane), ParamBounds{}),
                       doctest::Contains("degenerate cloud"), AlgorithmError);
}

TEST_CASE("e_step") {
  const Superquadric sq = make_sq(1, 1, 10, 10, 10);
  const PointCloud cloud = cloud_of({{10, 0, 0}, {0, 12, 0}, {0, 0, 30}, {0, 0, 1e4}});
  const double volume = 1e6;
  const std::vector<double> g = e_step(cloud, sq, 1.0, 0.1, volume);
  REQUIRE(g.size() == 4);
  CHECK(g[0] > 0.99);
  CHECK(g[1] > g[2]);
  CHECK(g[3] < 1e-12);
  for (double v : g) CHECK((v >= 0 && v <= 1));

  for (double v : e_step(cloud, sq, 1.0, 0.0, volume)) CHECK(v == 1.0);
}

TEST_CASE("m_step") {
  const Superquadric gt = make_sq(0.7, 1.2, 30, 20, 15, Vec3(0.3, -0.2, 0.5), Vec3(5, -4, 3));
  const PointCloud cloud = sample_surface(gt, 2000, 2);
  const std::vector<double> ones(cloud.size(), 1.0);
  const ParamBounds bounds = ParamBounds::for_cloud(cloud);

  const MStepResult fixed = m_step(cloud, ones, gt, bounds);
  CHECK((to_vector(fixed.theta) - to_vector(gt)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fixed.sigma <= 1e-2);

  Superquadric inflated = gt;
  inflated.scale = {gt.scale.ax * 1.05, gt.scale.ay * 1.05, gt.scale.az * 1.05};
  const MStepResult step = m_step(cloud, ones, inflated, bounds);
  CHECK(weighted_objective(cloud, ones, step.theta) < weighted_objective(cloud, ones, inflated));

  const std::vector<double> rejected(cloud.size(), 5e-4);
  CHECK_THROWS_WITH_AS(m_step(cloud, rejected, gt, bounds),
                       doctest::Contains("all points rejected as outliers"), AlgorithmError);
}

TEST_CASE("m_step never increases the objective") {
  sqkit::Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const Superquadric gt = sqtest::random_sq(rng);
    const auto noisy = sqtest::noisy_cloud(gt, 500, 100 + i, 0.5, 0.2);
    const ParamBounds bounds = ParamBounds::for_cloud(noisy.cloud);
    std::vector<double> gamma(noisy.cloud.size());
    for (double& v : gamma) v = rng.uniform();
    const Superquadric start = initialize(noisy.cloud, bounds);
    const MStepResult r = m_step(noisy.cloud, gamma, start, bounds);
    CHECK(weighted_objective(noisy.cloud, gamma, r.theta) <=
          weighted_objective(noisy.cloud, gamma, start));
  }
}

TEST_CASE("switch_step") {
  const Superquadric sphere = make_sq(1, 1, 10, 10, 10);
  const PointCloud sphere_cloud = sample_surface(sphere, 1000, 3);
  const std::vector<double> ones(sphere_cloud.size(), 1.0);
  const double v_sphere = outlier_volume(sphere_cloud);
  const SwitchResult kept = switch_step(sphere_cloud, ones, sphere, 0.1, 0.1, v_sphere,
                                        ParamBounds::for_cloud(sphere_cloud));
  CHECK_FALSE(kept.switched);
  CHECK(kept.loglik_after >= kept.loglik_before);

  const Superquadric gt = make_sq(0.3, 1.9, 12, 18, 30, Vec3(0.2, 0.1, -0.4), Vec3(1, 2, 3));
  const PointCloud cloud = sample_surface(gt, 2000, 4);
  const std::vector<double> all(cloud.size(), 1.0);
  const Superquadric wrong = duality_candidates(gt)[1];
  const double volume = outlier_volume(cloud);
  const SwitchResult s = switch_step(cloud, all, wrong, 1.0, 0.1, volume,
                                     ParamBounds::for_cloud(cloud));
  CHECK(s.switched);
  CHECK(s.loglik_after >= s.loglik_before);
  CHECK(s.loglik_before ==
        doctest::Approx(log_likelihood(cloud, wrong, 1.0, 0.1, volume)).epsilon(1e-12));
}

TEST_CASE("switch_step never lowers the likelihood") {
  sqkit::Rng rng(22);
  for (int i = 0; i < 10; ++i) {
    const Superquadric gt = sqtest::random_sq(rng);
    const auto noisy = sqtest::noisy_cloud(gt, 500, 200 + i, 0.5, 0.2);
    const ParamBounds bounds = ParamBounds::for_cloud(noisy.cloud);
    const Superquadric start = initialize(noisy.cloud, bounds);
    const double volume = outlier_volume(noisy.cloud);
    const double sigma = 0.05 * bounding_box(noisy.cloud.points).extent().norm();
    const std::vector<double> gamma = e_step(noisy.cloud, start, sigma, 0.1, volume);
    const SwitchResult s = switch_step(noisy.cloud, gamma, start, sigma, 0.1, volume, bounds);
    CHECK(s.loglik_after >= s.loglik_before);
  }
}

TEST_CASE("fit recovers a clean ellipsoid") {
  const Superquadric gt = make_sq(1, 1, 30, 20, 10);
  const FitReport r = fit(sample_surface(gt, 2000, 5));
  CHECK(r.converged);
  std::array<double, 3> scales = {r.theta.scale.ax, r.theta.scale.ay, r.theta.scale.az};
  std::sort(scales.begin(), scales.end());
  CHECK(scales[0] == doctest::Approx(10).epsilon(0.01));
  CHECK(scales[1] == doctest::Approx(20).epsilon(0.01));
  CHECK(scales[2] == doctest::Approx(30).epsilon(0.01));
  CHECK(std::abs(r.theta.shape.eps1 - 1) < 0.05);
  CHECK(std::abs(r.theta.shape.eps2 - 1) < 0.05);
  CHECK(r.responsibilities.size() == 2000);
  CHECK(non_decreasing(r.loglik_trace));
}

TEST_CASE("fit with noise and outliers") {
  const Superquadric gt = make_sq(1, 1, 30, 20, 10);
  const auto noisy = sqtest::noisy_cloud(gt, 2000, 6, 0.5, 0.2);
  const FitReport r = fit(noisy.cloud);
  const double mean_scale = 20;
  CHECK(sqtest::surface_error(gt, r.theta) < 0.02 * mean_scale);
  double inlier_gamma = 0;
  for (std::size_t i = 0; i < noisy.inliers; ++i) inlier_gamma += r.responsibilities[i];
  CHECK(inlier_gamma / static_cast<double>(noisy.inliers) > 0.8);
  CHECK(non_decreasing(r.loglik_trace));

  FitConfig plain;
  plain.outlier_prior = 0;
  const FitReport no_outliers = fit(noisy.cloud, plain);
  CHECK(sqtest::surface_error(gt, no_outliers.theta) > sqtest::surface_error(gt, r.theta));
}

TEST_CASE("fit errors and config validation") {
  const PointCloud five = cloud_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}});
  CHECK_THROWS_WITH_AS(fit(five), doctest::Contains("underdetermined"), AlgorithmError);

  FitConfig c;
  c.outlier_prior = 1.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.tol = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.bounds = ParamBounds{1.5, 1.0};
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("fit is deterministic") {
  const auto noisy = sqtest::noisy_cloud(make_sq(0.6, 1.4, 25, 15, 35, Vec3(0.4, 0.4, 0)), 1500, 7, 0.5, 0.2);
  FitConfig config;
  config.max_points = 1000;
  config.seed = 9;
  const FitReport a = fit(noisy.cloud, config);
  const FitReport b = fit(noisy.cloud, config);
  CHECK(to_vector(a.theta) == to_vector(b.theta));
  CHECK(a.sigma == b.sigma);
  CHECK(a.loglik_trace == b.loglik_trace);
  CHECK(a.responsibilities == b.responsibilities);
  CHECK(a.responsibilities.size() == noisy.cloud.size());
}

TEST_CASE("fit is equivariant under rigid motion") {
  const Superquadric gt = make_sq(0.8, 1.3, 25, 15, 35, Vec3(0.1, 0.2, 0.3), Vec3(1, 2, 3));
  const PointCloud cloud = sample_surface(gt, 2000, 8);
  Pose g;
  g.rotation = axis_angle_to_rotation(Vec3(-0.7, 0.4, 1.1));
  g.translation = Vec3(40, -25, 12);
  PointCloud moved = cloud;
  for (Vec3& p : moved.points) p = g.to_world(p);

  FitConfig config;
  config.tol = 1e-12;
  config.max_iters = 200;
  const FitReport a = fit(cloud, config);
  const FitReport b = fit(moved, config);
  Superquadric a_moved = a.theta;
  a_moved.pose.rotation = g.rotation * a.theta.pose.rotation;
  a_moved.pose.translation = g.to_world(a.theta.pose.translation);

  sqkit::Rng rng(23);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = g.to_world(gt.pose.translation + Vec3(rng.uniform(-40, 40), rng.uniform(-40, 40),
                                                          rng.uniform(-40, 40)));
    const double fa = inside_outside(a_moved, p);
    const double fb = inside_outside(b.theta, p);
    worst = std::max(worst, std::abs(fa - fb));
  }
  CHECK(worst < 1e-6);
}
