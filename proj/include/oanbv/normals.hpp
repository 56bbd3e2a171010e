#pragma once

#include "oanbv/kdtree.hpp"
#include "oanbv/point_cloud.hpp"

namespace oanbv {

/// Principal-component normals from the k nearest neighbors (the point
/// itself included), oriented toward `sensor_origin`. Neighborhoods whose
/// covariance has rank < 2 get normal_valid = 0.
/// Throws std::invalid_argument when k < 3 or the cloud has fewer than k points.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k, const Vector3& sensor_origin);

}  // namespace oanbv
