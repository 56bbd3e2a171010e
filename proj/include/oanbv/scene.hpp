#pragma once

#include "oanbv/humanoid.hpp"
#include "oanbv/robot.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oanbv {

enum class ScenarioFamily : std::uint8_t { indoor, outdoor };

std::string_view family_name(ScenarioFamily f);
/// Throws std::invalid_argument for unknown names.
ScenarioFamily parse_family(std::string_view name);

/// Piecewise-planar heightfield: a regular grid of vertex heights, each cell
/// split into two triangles along its (0,0)-(1,1) diagonal.
struct Terrain {
  double origin_x = -8.0;
  double origin_y = -8.0;
  double resolution = 0.25;
  int cells_x = 64;
  int cells_y = 64;
  /// (cells_x + 1) * (cells_y + 1) vertex heights, x fastest.
  std::vector<double> heights;

  bool contains(double x, double y) const;
  double vertex_height(int i, int j) const { return heights[std::size_t(j) * (cells_x + 1) + i]; }
  /// Height of the triangulated surface; clamps to the border outside.
  double height_at(double x, double y) const;
  double max_x() const { return origin_x + resolution * cells_x; }
  double max_y() const { return origin_y + resolution * cells_y; }
};

/// Yaw-rotated box occluder.
struct Box {
  Vector3 center = Vector3::Zero();
  Vector3 half_extents = Vector3::Constant(0.5);
  double yaw = 0.0;

  Vector3 to_local(const Vector3& p) const;
  bool contains(const Vector3& p, double margin = 0.0) const;
  bool footprint_contains(double x, double y, double margin = 0.0) const;
  /// Euclidean distance from p to the box (0 inside).
  double distance(const Vector3& p) const;
  double top() const { return center.z() + half_extents.z(); }
  double volume() const { return 8.0 * half_extents.x() * half_extents.y() * half_extents.z(); }
  /// Entry distance along a unit ray, or the exit distance when the origin is
  /// inside. nullopt when the ray misses within (0, t_max].
  std::optional<double> intersect(const Vector3& origin, const Vector3& dir, double t_max) const;
};

/// Parameters that regenerate the target mesh.
struct TargetSpec {
  JointAngles angles;
  double height = 1.7;
  /// Body frame to world.
  Pose3d pose;
};

struct Scene {
  ScenarioFamily family = ScenarioFamily::indoor;
  std::uint64_t seed = 0;
  Terrain terrain;
  std::vector<Box> occluders;
  TargetSpec target_spec;
  /// World-frame target mesh (ground-truth pose).
  LabeledMesh target;
  Pose3d spawn_base;
  double spawn_pitch = 0.0;

  /// Camera body pose at spawn.
  Pose3d spawn_camera(const RobotModel& robot) const {
    return camera_from_base(spawn_base, spawn_pitch, robot.mount, robot.pitch_min, robot.pitch_max);
  }
  bool inside_occluder(const Vector3& p, double margin = 0.0) const;
};

/// Rebuilds `scene.target` from `scene.target_spec`.
void rebuild_target(Scene& scene);

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric stand-in for a detector's confidence gate.
struct DetectionThresholds {
  /// Minimum target mask area as a fraction of the image.
  double tau_area = 0.005;
  /// Minimum number of visible keypoints.
  int tau_kp = 4;
};

struct SceneGenConfig {
  RobotModel robot;
  CameraIntrinsics K;
  int stride = 2;
  /// Band for the fraction of target vertices hidden by terrain or boxes at spawn.
  double occlusion_min = 0.2;
  double occlusion_max = 0.8;
  /// Fraction of target vertices that must project into the spawn image.
  double min_in_frame = 0.95;
  /// Upper bound on the spawn keypoint visibility ratio, so the body is only
  /// partially visible at spawn.
  double max_spawn_keypoint_ratio = 0.6;
  DetectionThresholds detection;
  int max_attempts = 100;
};

/// Deterministic in (family, seed, config). Rejection-samples layouts until
/// the spawn view is partially occluded and the target is detected there;
/// throws GenerationError after `max_attempts` failures.
Scene generate_scene(ScenarioFamily family, std::uint64_t seed, const SceneGenConfig& config = {});

}  // namespace oanbv
