// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/serialize.hpp"

#include <array>

#include "json.hpp"
#include "sqkit/error.hpp"

namespace sqkit {

namespace {

using nlohmann::json;

json theta_object(const Superquadric& sq) {
  const Vec3 r = rotation_to_axis_angle(sq.pose.rotation);
  const Vec3& t = sq.pose.translation;
  return {{"eps1", sq.shape.eps1},
          {"eps2", sq.shape.eps2},
          {"scale", {sq.scale.ax, sq.scale.ay, sq.scale.az}},
          {"rotation_axis_angle", {r.x(), r.y(), r.z()}},
          {"translation", {t.x(), t.y(), t.z()}}};
}

Vec3 triple(const json& obj, const char* key) {
  const auto v = obj.at(key).get<std::array<double, 3>>();
  return {v[0], v[1], v[2]};
}

}  // namespace

std::string theta_to_json(const Superquadric& sq) {
  return theta_object(sq).dump(2) + "\n";
}

Superquadric theta_from_json(const std::string& text) {
  Superquadric sq;
  try {
    const json obj = json::parse(text);
    sq.shape = {obj.at("eps1").get<double>(), obj.at("eps2").get<double>()};
    const Vec3 s = triple(obj, "scale");
    sq.scale = {s.x(), s.y(), s.z()};
    sq.pose.rotation = axis_angle_to_rotation(triple(obj, "rotation_axis_angle"));
    sq.pose.translation = triple(obj, "translation");
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid superquadric JSON: ") + e.what());
  }
  validate(sq);
  return sq;
}

std::string fit_report_to_json(const FitReport& report, bool with_responsibilities) {
  json out = {{"theta", theta_object(report.theta)},
              {"sigma", report.sigma},
              {"loglik_trace", report.loglik_trace},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"switched", report.switched}};
  if (with_responsibilities) out["responsibilities"] = report.responsibilities;
  return out.dump(2) + "\n";
}

std::string metric_report_to_json(const MetricReport& report) {
  return json{{"name", report.name}, {"value", report.value}, {"units", report.units}}
             .dump(2) +
         "\n";
}

}  // namespace sqkit
