// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqkit/superquadric.hpp"

namespace sqkit {

// Static 3-d tree over a borrowed point array. Exact nearest-neighbour
// queries; squared distances are computed the same way as a brute-force scan
// so both agree bit for bit.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0;
  };

  // Requires a non-empty point set.
  Neighbor nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    int axis = -1;            // -1 for leaves
    double split = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& query, Neighbor& best) const;

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

double squared_distance(const Vec3& a, const Vec3& b);

}  // namespace sqkit
