// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Robust single-superquadric recovery by Expectation, Maximization and
// Switching.
//
// Points are modelled as a mixture of an isotropic 3D Gaussian around the
// surface, evaluated at the radial distance (inliers), and a uniform density over an inflated bounding box
// (outliers). Each round infers inlier responsibilities, refines the
// parameters by damped weighted least squares, and periodically tries the
// duality candidates of the current estimate, keeping whichever has the higher
// likelihood.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sqkit/geometry.hpp"
#include "sqkit/superquadric.hpp"

namespace sqkit {

struct ParamBounds {
  double eps_min = kEpsMin;
  double eps_max = kEpsMax;
  double scale_min = 0.1;  // mm
  double scale_max = 1e3;  // mm

  // Default box for a cloud: scales up to twice its bounding-box diagonal.
  static ParamBounds for_cloud(const PointCloud& cloud);
  void validate() const;
};

struct FitConfig {
  int max_iters = 60;
  // Relative change of the log-likelihood that counts as converged.
  double tol = 1e-6;
  double outlier_prior = 0.1;
  // Initial noise scale in mm; unset means 5% of the bounding-box diagonal.
  std::optional<double> sigma_init;
  // Clouds larger than max_points (when non-zero) are subsampled with this
  // seed before fitting.
  std::uint64_t seed = 0;
  std::size_t max_points = 0;
  std::optional<ParamBounds> bounds;
  int switch_every = 5;
  bool reestimate_outlier_prior = false;
  // Levenberg-Marquardt iterations per M-step.
  int lm_iterations = 10;

  void validate() const;
};

struct FitReport {
  Superquadric theta;
  double sigma = 0;
  std::vector<double> responsibilities;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  bool switched = false;
};

// Volume of the uniform outlier component: axis-aligned bounding box of the
// cloud inflated by 10%.
double outlier_volume(const PointCloud& cloud);

double log_likelihood(const PointCloud& cloud, const Superquadric& theta,
                      double sigma, double outlier_prior, double volume);

// Weighted sum of squared radial residuals, the M-step objective.
double weighted_objective(const PointCloud& cloud,
                          const std::vector<double>& responsibilities,
                          const Superquadric& theta);

// PCA initial guess. Throws AlgorithmError("underdetermined") below 11 points
// and AlgorithmError("degenerate cloud") for planar or collinear clouds.
Superquadric initialize(const PointCloud& cloud, const ParamBounds& bounds);

std::vector<double> e_step(const PointCloud& cloud, const Superquadric& theta,
                           double sigma, double outlier_prior, double volume);

struct MStepResult {
  Superquadric theta;
  double sigma = 0;
};

// Never increases weighted_objective relative to theta_prev.
MStepResult m_step(const PointCloud& cloud,
                   const std::vector<double>& responsibilities,
                   const Superquadric& theta_prev, const ParamBounds& bounds,
                   int lm_iterations = 10);

struct SwitchResult {
  Superquadric theta;
  double sigma = 0;
  bool switched = false;
  double loglik_before = 0;
  double loglik_after = 0;
};

// Refines the duality candidates of theta and the same candidates turned 45
// degrees about their z axis (eps2 -> 2 - eps2), one m_step each, and keeps
// the most likely. switched is set only when a candidate other than theta
// beats both theta and refined theta.
SwitchResult switch_step(const PointCloud& cloud,
                         const std::vector<double>& responsibilities,
                         const Superquadric& theta, double sigma,
                         double outlier_prior, double volume,
                         const ParamBounds& bounds, int lm_iterations = 10);

FitReport fit(const PointCloud& cloud, const FitConfig& config = {});

}  // namespace sqkit
