// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sqkit/error.hpp"
#include "sqkit/rng.hpp"

namespace sqkit {

namespace {

using Vec11 = Eigen::Matrix<double, 11, 1>;
using Mat11 = Eigen::Matrix<double, 11, 11>;

constexpr std::size_t kMinPoints = 11;
constexpr double kSigmaSqFloor = 1e-4;  // mm^2
constexpr double kInlierThreshold = 1e-3;
constexpr double kSwitchMargin = 1e-9;
// Inliers follow an isotropic 3D Gaussian around the surface, evaluated at the
// radial distance; sigma is the per-axis standard deviation.
constexpr double kNoiseDim = 3.0;

double point_weight(const PointCloud& cloud, std::size_t i) {
  return cloud.weights.empty() ? 1.0 : cloud.weights[i];
}

double bbox_diagonal(const PointCloud& cloud) {
  return bounding_box(cloud.points).extent().norm();
}

Mat3 reorthonormalize(const Mat3& r) {
  return Eigen::Quaterniond(r).normalized().toRotationMatrix();
}

// Applies an increment in the local parameterization: shape and scale add,
// rotation composes on the right, translation moves along the local axes.
Superquadric perturb(const Superquadric& base, const Vec11& d) {
  Superquadric out = base;
  out.shape.eps1 += d[0];
  out.shape.eps2 += d[1];
  out.scale.ax += d[2];
  out.scale.ay += d[3];
  out.scale.az += d[4];
  out.pose.rotation = base.pose.rotation * axis_angle_to_rotation(d.segment<3>(5));
  out.pose.translation += base.pose.rotation * d.segment<3>(8);
  return out;
}

Superquadric project(Superquadric sq, const ParamBounds& b) {
  sq.shape.eps1 = std::clamp(sq.shape.eps1, b.eps_min, b.eps_max);
  sq.shape.eps2 = std::clamp(sq.shape.eps2, b.eps_min, b.eps_max);
  sq.scale.ax = std::clamp(sq.scale.ax, b.scale_min, b.scale_max);
  sq.scale.ay = std::clamp(sq.scale.ay, b.scale_min, b.scale_max);
  sq.scale.az = std::clamp(sq.scale.az, b.scale_min, b.scale_max);
  sq.pose.rotation = reorthonormalize(sq.pose.rotation);
  return sq;
}

// 45-degree turn about the local z axis. A cross-section with exponent eps2
// seen at 45 degrees resembles one with exponent 2 - eps2 (a square becomes a
// diamond), with the in-plane scales changed by 2^((1 - eps2) / 2).
Superquadric diagonal_turn(Superquadric sq) {
  const double k = std::pow(2.0, (1.0 - sq.shape.eps2) / 2.0);
  const double a = k * 0.5 * (sq.scale.ax + sq.scale.ay);
  sq.shape.eps2 = 2.0 - sq.shape.eps2;
  sq.scale.ax = a;
  sq.scale.ay = a;
  sq.pose.rotation =
      sq.pose.rotation * axis_angle_to_rotation(Vec3(0, 0, std::numbers::pi / 4));
  return sq;
}

// Restart points for the switch: the duality candidates and each of them
// turned about its z axis, then the same for the turned input, so that a turn
// about another axis is reachable. Index 0 is the input itself.
std::vector<Superquadric> switch_candidates(const Superquadric& theta) {
  std::vector<Superquadric> out;
  const Superquadric turned = diagonal_turn(theta);
  for (const Superquadric& base : {theta, turned}) {
    const auto duals = duality_candidates(base);
    for (std::size_t i = 0; i < duals.size(); ++i) {
      if (&base == &turned && i == 0) continue;  // already added as a turn
      out.push_back(duals[i]);
    }
    for (const Superquadric& d : duals) out.push_back(diagonal_turn(d));
  }
  return out;
}

// sqrt(w_i * gamma_i) * signed radial residual.
void weighted_residuals(const PointCloud& cloud, const std::vector<double>& root_w,
                        const Superquadric& sq, Eigen::VectorXd& out) {
  const std::size_t n = cloud.size();
  out.resize(static_cast<Eigen::Index>(n));
  const Mat3 rt = sq.pose.rotation.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    if (root_w[i] == 0.0) {
      out[static_cast<Eigen::Index>(i)] = 0.0;
      continue;
    }
    const Vec3 q = rt * (cloud.points[i] - sq.pose.translation);
    out[static_cast<Eigen::Index>(i)] =
        root_w[i] * radial_residual_local(sq.shape, sq.scale, q);
  }
}

double log_gaussian(double d, double sigma) {
  return -0.5 * kNoiseDim * std::log(2 * std::numbers::pi) -
         kNoiseDim * std::log(sigma) - d * d / (2 * sigma * sigma);
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -INFINITY) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_cloud(const PointCloud& cloud) {
  validate(cloud);
  if (cloud.size() < kMinPoints) {
    throw AlgorithmError("underdetermined: need at least 11 points, got " +
                         std::to_string(cloud.size()));
  }
}

void check_mixture(double sigma, double outlier_prior, double volume) {
  if (!(sigma > 0)) throw ContractError("sigma must be positive");
  if (!(outlier_prior >= 0 && outlier_prior < 1)) {
    throw ContractError("outlier prior must lie in [0, 1)");
  }
  if (!(volume > 0)) throw ContractError("outlier volume must be positive");
}

PointCloud subsample(const PointCloud& cloud, std::size_t max_points,
                     std::uint64_t seed) {
  if (max_points == 0 || cloud.size() <= max_points) return cloud;
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < max_points; ++i) {
    const std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
  }
  order.resize(max_points);
  std::sort(order.begin(), order.end());
  PointCloud out;
  for (std::size_t i : order) {
    out.points.push_back(cloud.points[i]);
    if (!cloud.weights.empty()) out.weights.push_back(cloud.weights[i]);
  }
  return out;
}

}  // namespace

ParamBounds ParamBounds::for_cloud(const PointCloud& cloud) {
  ParamBounds b;
  b.scale_max = std::max(2.0 * bbox_diagonal(cloud), 2.0 * b.scale_min);
  return b;
}

void ParamBounds::validate() const {
  if (!(eps_min >= kEpsMin && eps_min <= eps_max && eps_max <= kEpsMax)) {
    throw ContractError("shape bounds must satisfy 0.1 <= eps_min <= eps_max <= 2");
  }
  if (!(scale_min > 0 && scale_min <= scale_max && std::isfinite(scale_max))) {
    throw ContractError("scale bounds must satisfy 0 < scale_min <= scale_max");
  }
}

void FitConfig::validate() const {
  if (max_iters < 1) throw ContractError("max_iters must be at least 1");
  if (!(tol > 0)) throw ContractError("tol must be positive");
  if (!(outlier_prior >= 0 && outlier_prior < 1)) {
    throw ContractError("outlier prior must lie in [0, 1)");
  }
  if (sigma_init && !(*sigma_init > 0)) throw ContractError("sigma_init must be positive");
  if (switch_every < 1) throw ContractError("switch_every must be at least 1");
  if (lm_iterations < 1) throw ContractError("lm_iterations must be at least 1");
  if (bounds) bounds->validate();
}

double outlier_volume(const PointCloud& cloud) {
  return 1.1 * bounding_box(cloud.points).volume();
}

double log_likelihood(const PointCloud& cloud, const Superquadric& theta,
                      double sigma, double outlier_prior, double volume) {
  check_mixture(sigma, outlier_prior, volume);
  const double log_in_prior = std::log1p(-outlier_prior);
  const double log_out = outlier_prior > 0
                             ? std::log(outlier_prior) - std::log(volume)
                             : -INFINITY;
  double total = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double w = point_weight(cloud, i);
    if (w == 0.0) continue;
    const double d = radial_distance(theta, cloud.points[i]);
    total += w * log_sum_exp(log_in_prior + log_gaussian(d, sigma), log_out);
  }
  return total;
}

double weighted_objective(const PointCloud& cloud,
                          const std::vector<double>& responsibilities,
                          const Superquadric& theta) {
  double total = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double w = point_weight(cloud, i) * responsibilities[i];
    if (w == 0.0) continue;
    const double d = radial_distance(theta, cloud.points[i]);
    total += w * d * d;
  }
  return total;
}

Superquadric initialize(const PointCloud& cloud, const ParamBounds& bounds) {
  check_cloud(cloud);
  bounds.validate();

  double weight_sum = 0;
  Vec3 centroid = Vec3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double w = point_weight(cloud, i);
    centroid += w * cloud.points[i];
    weight_sum += w;
  }
  centroid /= weight_sum;
  Mat3 covariance = Mat3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 d = cloud.points[i] - centroid;
    covariance += point_weight(cloud, i) * d * d.transpose();
  }
  covariance /= weight_sum;

  const Eigen::SelfAdjointEigenSolver<Mat3> solver(covariance);
  const Vec3 values = solver.eigenvalues();  // ascending
  if (!(values[2] > 0) || values[0] <= 1e-10 * values[2]) {
    throw AlgorithmError("degenerate cloud: points are planar or collinear");
  }
  auto oriented = [](Vec3 v) {
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    return v[k] < 0 ? Vec3(-v) : v;
  };
  Mat3 rotation;
  rotation.col(0) = oriented(solver.eigenvectors().col(2));
  rotation.col(1) = oriented(solver.eigenvectors().col(1));
  rotation.col(2) = rotation.col(0).cross(rotation.col(1));

  // Points spread over an ellipsoid surface have standard deviation a / sqrt(3)
  // along each principal axis. The covariance is far less sensitive to a few
  // distant outliers than the extent would be.
  const Vec3 half(std::sqrt(3 * values[2]), std::sqrt(3 * values[1]),
                  std::sqrt(3 * values[0]));

  Superquadric sq;
  sq.shape = {1.0, 1.0};
  sq.scale = {std::clamp(half.x(), bounds.scale_min, bounds.scale_max),
              std::clamp(half.y(), bounds.scale_min, bounds.scale_max),
              std::clamp(half.z(), bounds.scale_min, bounds.scale_max)};
  sq.pose.rotation = reorthonormalize(rotation);
  sq.pose.translation = centroid;
  return sq;
}

std::vector<double> e_step(const PointCloud& cloud, const Superquadric& theta,
                           double sigma, double outlier_prior, double volume) {
  check_mixture(sigma, outlier_prior, volume);
  std::vector<double> gamma(cloud.size(), 1.0);
  if (outlier_prior == 0.0) return gamma;
  const double log_in_prior = std::log1p(-outlier_prior);
  const double log_out = std::log(outlier_prior) - std::log(volume);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = radial_distance(theta, cloud.points[i]);
    const double log_in = log_in_prior + log_gaussian(d, sigma);
    gamma[i] = 1.0 / (1.0 + std::exp(log_out - log_in));
  }
  return gamma;
}

MStepResult m_step(const PointCloud& cloud,
                   const std::vector<double>& responsibilities,
                   const Superquadric& theta_prev, const ParamBounds& bounds,
                   int lm_iterations) {
  validate(theta_prev);
  bounds.validate();
  if (responsibilities.size() != cloud.size()) {
    throw ContractError("responsibilities must match the cloud size");
  }
  const std::size_t n = cloud.size();
  std::vector<double> root_w(n);
  std::size_t effective = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = point_weight(cloud, i);
    root_w[i] = std::sqrt(w * responsibilities[i]);
    if (w > 0 && responsibilities[i] > kInlierThreshold) ++effective;
  }
  if (effective < kMinPoints) {
    throw AlgorithmError("all points rejected as outliers");
  }

  Superquadric current = theta_prev;
  Eigen::VectorXd r, r_plus, r_minus, r_trial;
  weighted_residuals(cloud, root_w, current, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd jacobian(static_cast<Eigen::Index>(n), 11);

  for (int it = 0; it < lm_iterations; ++it) {
    // Central differences; steps are relative to each parameter's magnitude,
    // or to the mean scale for the translation increments.
    const double length = current.scale.mean();
    const double steps[11] = {
        1e-5 * current.shape.eps1, 1e-5 * current.shape.eps2,
        1e-5 * current.scale.ax,   1e-5 * current.scale.ay,
        1e-5 * current.scale.az,   1e-5, 1e-5, 1e-5,
        1e-5 * length,             1e-5 * length, 1e-5 * length};
    for (int k = 0; k < 11; ++k) {
      Vec11 d = Vec11::Zero();
      d[k] = steps[k];
      weighted_residuals(cloud, root_w, perturb(current, d), r_plus);
      weighted_residuals(cloud, root_w, perturb(current, -d), r_minus);
      jacobian.col(k) = (r_plus - r_minus) / (2 * steps[k]);
    }
    Mat11 jtj = jacobian.transpose() * jacobian;
    Vec11 jtr = jacobian.transpose() * r;
    const double diag_max = std::max(jtj.diagonal().maxCoeff(), 1e-300);

    // Shape and scale parameters resting on a bound with the gradient pushing
    // outward are held fixed for this step.
    const double values[5] = {current.shape.eps1, current.shape.eps2, current.scale.ax,
                              current.scale.ay, current.scale.az};
    for (int k = 0; k < 5; ++k) {
      const double lo = k < 2 ? bounds.eps_min : bounds.scale_min;
      const double hi = k < 2 ? bounds.eps_max : bounds.scale_max;
      const double slack = 1e-12 * std::max(1.0, hi);
      if ((values[k] <= lo + slack && jtr[k] > 0) || (values[k] >= hi - slack && jtr[k] < 0)) {
        jtj.row(k).setZero();
        jtj.col(k).setZero();
        jtj(k, k) = diag_max;
        jtr[k] = 0;
      }
    }

    bool accepted = false;
    double new_cost = cost;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Mat11 a = jtj;
      for (int k = 0; k < 11; ++k) {
        a(k, k) += lambda * (jtj(k, k) + 1e-9 * diag_max);
      }
      const Vec11 delta = a.ldlt().solve(-jtr);
      if (!delta.allFinite()) {
        lambda *= 10;
        continue;
      }
      const Superquadric trial = project(perturb(current, delta), bounds);
      weighted_residuals(cloud, root_w, trial, r_trial);
      new_cost = r_trial.squaredNorm();
      if (new_cost < cost) {
        current = trial;
        r.swap(r_trial);
        lambda = std::max(lambda / 3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4;
    }
    if (!accepted) break;
    const double decrease = cost - new_cost;
    cost = new_cost;
    if (decrease <= 1e-12 * cost) break;
  }

  double wsum = 0, wd2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = point_weight(cloud, i) * responsibilities[i];
    if (w == 0.0) continue;
    const double d = radial_distance(current, cloud.points[i]);
    wsum += w;
    wd2 += w * d * d;
  }
  const double sigma_sq = std::max(wd2 / (kNoiseDim * wsum), kSigmaSqFloor);
  return {current, std::sqrt(sigma_sq)};
}

SwitchResult switch_step(const PointCloud& cloud,
                         const std::vector<double>& responsibilities,
                         const Superquadric& theta, double sigma,
                         double outlier_prior, double volume,
                         const ParamBounds& bounds, int lm_iterations) {
  validate(theta);
  SwitchResult result;
  result.theta = theta;
  result.sigma = sigma;
  result.loglik_before = log_likelihood(cloud, theta, sigma, outlier_prior, volume);
  result.loglik_after = result.loglik_before;

  // Every candidate, the identity included, gets the same refinement so that
  // a switch is only reported when the relabeling itself wins.
  const auto candidates = switch_candidates(theta);
  double best = result.loglik_before;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const MStepResult refined = m_step(cloud, responsibilities,
                                       project(candidates[c], bounds), bounds,
                                       lm_iterations);
    const double ll = log_likelihood(cloud, refined.theta, refined.sigma,
                                     outlier_prior, volume);
    if (c == 0) {
      best = std::max(best, ll);
      continue;
    }
    if (ll > best + kSwitchMargin) {
      best = ll;
      result.theta = refined.theta;
      result.sigma = refined.sigma;
      result.loglik_after = ll;
      result.switched = true;
    }
  }
  return result;
}

FitReport fit(const PointCloud& input, const FitConfig& config) {
  config.validate();
  check_cloud(input);
  const PointCloud cloud = subsample(input, config.max_points, config.seed);
  check_cloud(cloud);

  const ParamBounds bounds =
      config.bounds ? *config.bounds : ParamBounds::for_cloud(cloud);
  Superquadric theta = initialize(cloud, bounds);
  double sigma = config.sigma_init ? *config.sigma_init : 0.05 * bbox_diagonal(cloud);
  const double volume = outlier_volume(cloud);
  double w0 = config.outlier_prior;

  FitReport report;
  double ll = log_likelihood(cloud, theta, sigma, w0, volume);
  report.loglik_trace.push_back(ll);

  auto try_switch = [&]() {
    const auto gamma = e_step(cloud, theta, sigma, w0, volume);
    const SwitchResult s = switch_step(cloud, gamma, theta, sigma, w0, volume,
                                       bounds, config.lm_iterations);
    if (s.switched) {
      theta = s.theta;
      sigma = s.sigma;
      report.switched = true;
    }
    return s;
  };

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    report.iterations = iter;
    const auto gamma = e_step(cloud, theta, sigma, w0, volume);
    const MStepResult m = m_step(cloud, gamma, theta, bounds, config.lm_iterations);
    theta = m.theta;
    sigma = m.sigma;
    if (config.reestimate_outlier_prior) {
      double wsum = 0, out = 0;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double w = point_weight(cloud, i);
        wsum += w;
        out += w * (1.0 - gamma[i]);
      }
      w0 = std::min(out / wsum, 0.99);
    }
    double next = log_likelihood(cloud, theta, sigma, w0, volume);
    if (iter % config.switch_every == 0) {
      const SwitchResult s = try_switch();
      if (s.switched) next = s.loglik_after;
    }
    report.loglik_trace.push_back(next);
    const double change = std::abs(next - ll);
    ll = next;
    const double threshold = config.tol * std::max(1.0, std::abs(ll));
    if (change < threshold) {
      const SwitchResult s = try_switch();
      if (s.switched) {
        ll = s.loglik_after;
        report.loglik_trace.push_back(ll);
        // A switch that only polishes the optimum does not restart the loop.
        if (s.loglik_after - s.loglik_before >= threshold) continue;
      }
      report.converged = true;
      break;
    }
  }

  report.theta = canonicalize(theta);
  report.sigma = sigma;
  report.responsibilities = e_step(input, report.theta, sigma, w0, volume);
  return report;
}

}  // namespace sqkit
