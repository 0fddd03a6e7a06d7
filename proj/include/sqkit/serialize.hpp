// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// JSON interchange. A superquadric is written as
//
//   {"eps1": .., "eps2": .., "scale": [ax, ay, az],
//    "rotation_axis_angle": [rx, ry, rz], "translation": [tx, ty, tz]}
//
// with millimetres and radians.

#pragma once

#include <string>

#include "sqkit/fit.hpp"
#include "sqkit/metrics.hpp"
#include "sqkit/superquadric.hpp"

namespace sqkit {

std::string theta_to_json(const Superquadric& sq);
// Throws InputError for malformed text, ContractError for invalid values.
Superquadric theta_from_json(const std::string& text);

std::string fit_report_to_json(const FitReport& report, bool with_responsibilities);

std::string metric_report_to_json(const MetricReport& report);

}  // namespace sqkit
