#pragma once

#include "oanbv/pose.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace oanbv {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Static 3D kd-tree. Queries are exact and break distance ties toward the
/// lower point index, so results match a linear scan element for element.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vector3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// Throws std::invalid_argument on an empty tree.
  Neighbor nearest(const Vector3& query) const;

  /// Up to k nearest points sorted by (distance, index).
  std::vector<Neighbor> k_nearest(const Vector3& query, std::size_t k) const;

  const Vector3& point(std::size_t i) const { return points_[i]; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int8_t axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vector3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Linear-scan nearest neighbor with the same tie rule as KdTree.
Neighbor brute_force_nearest(std::span<const Vector3> points, const Vector3& query);

}  // namespace oanbv
