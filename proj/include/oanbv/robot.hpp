#pragma once

#include "oanbv/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace oanbv {

/// Legged-robot camera geometry. Base and camera body frames follow the
/// robot convention (x forward, y left, z up).
struct RobotModel {
  /// Camera body pose in the base frame.
  Pose3d mount = Pose3d::from_translation(Vector3(0.25, 0.0, 0.10));
  /// Base height above the terrain surface when standing.
  double standing_height = 0.3;
  /// Camera pitch working range (radians); positive pitches down.
  double pitch_min = -0.75;
  double pitch_max = 0.75;
};

/// World camera body pose: base, then the fixed mount, then a pitch rotation
/// about the camera's local y axis. Throws std::invalid_argument when `alpha`
/// leaves [pitch_min, pitch_max].
inline Pose3d camera_from_base(const Pose3d& base, double alpha, const Pose3d& mount, double pitch_min = -0.75,
                               double pitch_max = 0.75) {
  if (!(alpha >= pitch_min - 1e-12 && alpha <= pitch_max + 1e-12)) {
    throw std::invalid_argument("camera_from_base: pitch outside the working range");
  }
  if (alpha == 0.0) return base * mount;
  return base * mount * Pose3d(rot_y(alpha), Vector3::Zero());
}

/// Base pose standing at `position` and yawed by `yaw` about world z.
inline Pose3d base_pose(const Vector3& position, double yaw) { return Pose3d(rot_z(yaw), position); }

/// Yaw of a base pose's forward (x) axis.
inline double base_yaw(const Pose3d& base) {
  const Vector3 fwd = base.rotation().col(0);
  return std::atan2(fwd.y(), fwd.x());
}

}  // namespace oanbv
