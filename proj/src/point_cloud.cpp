#include "oanbv/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oanbv {

void PointCloud::validate() const {
  if (!labels.empty() && labels.size() != points.size()) {
    throw std::invalid_argument("PointCloud: label count does not match point count");
  }
  if (!normals.empty() && normals.size() != points.size()) {
    throw std::invalid_argument("PointCloud: normal count does not match point count");
  }
  if (!normal_valid.empty() && normal_valid.size() != normals.size()) {
    throw std::invalid_argument("PointCloud: normal validity flags do not match normal count");
  }
}

PointCloud PointCloud::transformed(const Pose3d& pose) const {
  PointCloud out;
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(pose * p);
  out.labels = labels;
  out.normals.reserve(normals.size());
  for (const auto& n : normals) out.normals.push_back(pose.transform_direction(n));
  out.normal_valid = normal_valid;
  return out;
}

std::size_t PointCloud::count_label(PointLabel label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

long DepthImage::count_filled() const {
  return static_cast<long>(std::count_if(depth_.begin(), depth_.end(), [](double d) { return d != kEmpty; }));
}

DepthImage render_depth(std::span<const Vector3> world_points, const Pose3d& camera, const CameraIntrinsics& K,
                        int splat_radius) {
  if (splat_radius < 0) throw std::invalid_argument("render_depth: splat radius must be non-negative");
  DepthImage image(K.width, K.height);
  const Pose3d world_to_camera = camera.inverse();
  for (const auto& pw : world_points) {
    const Vector3 pc = world_to_camera * pw;
    const auto proj = project(K, pc);
    if (!proj) continue;
    // Far off-image projections cannot reach the image (and must not overflow the cast).
    const double reach = splat_radius + 1.0;
    if (!(proj->u > -reach && proj->u < K.width + reach && proj->v > -reach && proj->v < K.height + reach)) continue;
    const long iu = pixel_index(proj->u);
    const long iv = pixel_index(proj->v);
    const long u0 = std::max<long>(0, iu - splat_radius);
    const long u1 = std::min<long>(K.width - 1, iu + splat_radius);
    const long v0 = std::max<long>(0, iv - splat_radius);
    const long v1 = std::min<long>(K.height - 1, iv + splat_radius);
    for (long v = v0; v <= v1; ++v) {
      for (long u = u0; u <= u1; ++u) image.splat_min(u, v, proj->depth);
    }
  }
  return image;
}

}  // namespace oanbv
