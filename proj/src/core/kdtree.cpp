// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/kdtree.hpp"

#include <algorithm>
#include <limits>

#include "sqkit/error.hpp"

namespace sqkit {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ContractError("point set too large for the k-d tree");
  }
  order_.resize(points.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) {
    nodes_.reserve(2 * order_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(order_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  Eigen::Index axis;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = static_cast<int>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  if (nodes_.empty()) throw ContractError("nearest-neighbour query on an empty set");
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

void KdTree::search(std::int32_t id, const Vec3& query, Neighbor& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = squared_distance(query, points_[order_[i]]);
      if (d < best.squared_distance ||
          (d == best.squared_distance && order_[i] < best.index)) {
        best = {order_[i], d};
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = query[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search(near, query, best);
  if (diff * diff <= best.squared_distance) search(far, query, best);
}

}  // namespace sqkit
