#pragma once

#include "oanbv/point_cloud.hpp"
#include "oanbv/raycast.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace oanbv {

/// One simulated depth-camera frame. Rays go through the top-left pixel
/// center of each stride x stride block; mask and depth are stored at full
/// resolution with every block filled from its ray.
struct Observation {
  /// Hit points in the optical camera frame, labeled target/background.
  PointCloud cloud;
  std::vector<std::uint8_t> gt_mask;
  DepthImage depth;
  /// Optical-frame camera pose in world.
  Pose3d cam;
  CameraIntrinsics K;
  int stride = 2;
  long ray_count = 0;
  long target_ray_count = 0;

  bool mask_at(long u, long v) const { return gt_mask[std::size_t(v) * K.width + u] != 0; }
  long mask_pixels() const;
  /// Cloud in world coordinates.
  PointCloud world_cloud() const { return cloud.transformed(cam); }
};

Observation render_observation(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K,
                               int stride = 2);

/// Fraction of the image covered by the target mask: pixels / (W * H).
double target_area(const Observation& obs);

/// Same value as target_area(render_observation(...)) but only casts rays
/// inside the target's projected bounding box.
double target_area_fast(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K, int stride = 2);

/// Ground-truth mask grown (positive) or shrunk (negative) by a seed-chosen
/// number of pixels in [-boundary_noise, boundary_noise].
std::vector<std::uint8_t> oracle_segmentation(const Observation& obs, int boundary_noise, std::uint64_t seed);

/// Square (Chebyshev) dilation for radius > 0, erosion for radius < 0.
std::vector<std::uint8_t> morph_mask(const std::vector<std::uint8_t>& mask, int width, int height, int radius);

struct KeypointVisibility {
  std::array<bool, kKeypointCount> visible{};
  int n_vis = 0;
  int n_kp = kKeypointCount;
  double ratio() const { return double(n_vis) / n_kp; }
};

/// Clearance a ray keeps from its keypoint before target geometry counts as
/// self-occlusion.
inline constexpr double kSelfOcclusionMargin = 0.03;

/// A keypoint is visible when it projects into the frame and the segment from
/// the camera is not cut by terrain, boxes, or target parts the keypoint does
/// not belong to (the latter only up to kSelfOcclusionMargin before it).
KeypointVisibility oracle_keypoint_visibility(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K);

bool oracle_detection(double area, int n_vis, const DetectionThresholds& th);
bool oracle_detection(const Observation& obs, const RayCaster& caster, const DetectionThresholds& th);

/// Per target vertex: 1 when it projects into the frame, 0 otherwise.
std::vector<std::uint8_t> vertices_in_frame(const LabeledMesh& mesh, const Pose3d& cam, const CameraIntrinsics& K);

/// Per target vertex: 1 when terrain or a box cuts the camera-to-vertex segment.
std::vector<std::uint8_t> vertices_blocked(const RayCaster& caster, const Pose3d& cam, const LabeledMesh& mesh);

/// Fraction of target vertices hidden from `cam` by terrain or boxes.
double occluded_vertex_fraction(const RayCaster& caster, const Pose3d& cam);

}  // namespace oanbv
