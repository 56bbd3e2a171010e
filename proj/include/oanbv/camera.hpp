#pragma once

#include "oanbv/pose.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace oanbv {

/// Pinhole intrinsics. Camera frame is +z forward, +x right, +y down; pixel
/// (i, j) covers [i, i+1) x [j, j+1).
template <typename Scalar>
struct Intrinsics {
  Scalar fx = Scalar(525);
  Scalar fy = Scalar(525);
  Scalar cx = Scalar(320);
  Scalar cy = Scalar(240);
  int width = 640;
  int height = 480;

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be positive");
    if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height)) {
      throw std::invalid_argument("intrinsics: principal point outside the image");
    }
  }

  long pixel_count() const { return static_cast<long>(width) * height; }
};

using CameraIntrinsics = Intrinsics<double>;

template <typename Scalar>
struct PixelProjection {
  Scalar u;
  Scalar v;
  Scalar depth;
};

/// Projects a camera-frame point. Returns nullopt for points with z <= 0.
template <typename Scalar>
std::optional<PixelProjection<Scalar>> project(const Intrinsics<Scalar>& K, const Vec3<Scalar>& p) {
  if (!(p.z() > Scalar(0))) return std::nullopt;
  const Scalar inv_z = Scalar(1) / p.z();
  return PixelProjection<Scalar>{K.fx * p.x() * inv_z + K.cx, K.fy * p.y() * inv_z + K.cy, p.z()};
}

template <typename Scalar>
Vec3<Scalar> unproject(const Intrinsics<Scalar>& K, Scalar u, Scalar v, Scalar depth) {
  return Vec3<Scalar>((u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth);
}

/// Unit ray direction (camera frame) through continuous image coordinates.
template <typename Scalar>
Vec3<Scalar> pixel_ray(const Intrinsics<Scalar>& K, Scalar u, Scalar v) {
  return Vec3<Scalar>((u - K.cx) / K.fx, (v - K.cy) / K.fy, Scalar(1)).normalized();
}

/// Integer pixel index of a continuous coordinate (floor convention).
template <typename Scalar>
long pixel_index(Scalar coordinate) {
  return static_cast<long>(std::floor(coordinate));
}

template <typename Scalar>
bool in_frame(const Intrinsics<Scalar>& K, Scalar u, Scalar v) {
  const long iu = pixel_index(u);
  const long iv = pixel_index(v);
  return iu >= 0 && iu < K.width && iv >= 0 && iv < K.height;
}

/// Rotation taking the optical frame (z forward, x right, y down) into a
/// camera body frame that follows the robot convention (x forward, y left, z up).
template <typename Scalar>
Mat3<Scalar> body_from_optical() {
  Mat3<Scalar> R;
  R << Scalar(0), Scalar(0), Scalar(1),
      Scalar(-1), Scalar(0), Scalar(0),
      Scalar(0), Scalar(-1), Scalar(0);
  return R;
}

/// Optical-frame pose of a camera whose body pose (x forward) is given.
template <typename Scalar>
Pose<Scalar> optical_pose(const Pose<Scalar>& camera_body) {
  return camera_body * Pose<Scalar>(body_from_optical<Scalar>(), Vec3<Scalar>::Zero());
}

}  // namespace oanbv
