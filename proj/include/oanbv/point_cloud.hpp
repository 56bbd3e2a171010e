#pragma once

#include "oanbv/camera.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace oanbv {

enum class PointLabel : std::uint8_t { background = 0, target = 1 };

/// Points with optional per-point labels and normals. Optional channels are
/// either empty or the same length as `points`.
struct PointCloud {
  std::vector<Vector3> points;
  std::vector<PointLabel> labels;
  std::vector<Vector3> normals;
  /// 1 where the corresponding normal is usable, 0 for degenerate neighborhoods.
  std::vector<std::uint8_t> normal_valid;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Throws std::invalid_argument when the channel lengths disagree.
  void validate() const;

  /// New cloud with every point (and normal) mapped through `pose`.
  PointCloud transformed(const Pose3d& pose) const;

  std::size_t count_label(PointLabel label) const;
};

/// Per-pixel nearest depth; empty pixels hold +infinity.
class DepthImage {
 public:
  static constexpr double kEmpty = std::numeric_limits<double>::infinity();

  DepthImage() = default;
  DepthImage(int width, int height) : width_(width), height_(height), depth_(std::size_t(width) * height, kEmpty) {}

  int width() const { return width_; }
  int height() const { return height_; }

  double at(long u, long v) const { return depth_[std::size_t(v) * width_ + u]; }
  double& at(long u, long v) { return depth_[std::size_t(v) * width_ + u]; }
  bool empty_at(long u, long v) const { return at(u, v) == kEmpty; }

  /// Writes `depth` into pixel (u, v) when it is nearer than what is there.
  void splat_min(long u, long v, double depth) {
    double& d = at(u, v);
    if (depth < d) d = depth;
  }

  long count_filled() const;
  const std::vector<double>& data() const { return depth_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> depth_;
};

/// Z-buffers world-frame points as seen from `camera` (optical-frame pose in
/// world). Each point with positive depth writes to every pixel within
/// `splat_radius` (Chebyshev) of its floored projection; the minimum wins.
DepthImage render_depth(std::span<const Vector3> world_points, const Pose3d& camera,
                        const CameraIntrinsics& K, int splat_radius = 1);

inline DepthImage render_depth(const PointCloud& cloud, const Pose3d& camera, const CameraIntrinsics& K,
                               int splat_radius = 1) {
  return render_depth(std::span<const Vector3>(cloud.points), camera, K, splat_radius);
}

}  // namespace oanbv
