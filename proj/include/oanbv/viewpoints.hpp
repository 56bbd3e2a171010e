#pragma once

#include "oanbv/elevation.hpp"
#include "oanbv/robot.hpp"

#include <cstdint>
#include <vector>

namespace oanbv {

struct CandidateView {
  Pose3d base;
  double pitch = 0.0;
  /// Camera body pose in world (x forward).
  Pose3d cam;
  int position_index = 0;
  int pitch_index = 0;
  int id = 0;

  Pose3d optical() const { return optical_pose(cam); }
};

struct ElevationSamplerConfig {
  int M = 100;
  int pitch_samples = 10;
  RobotModel robot;
  /// Cells closer than this (horizontally) to the target are skipped.
  double min_target_distance = 0.5;
  /// The map cell under the camera must sit at least this far below it.
  double camera_clearance = 0.05;
};

/// Pitch angles spanning [lo, hi] with both endpoints.
std::vector<double> pitch_grid(double lo, double hi, int count);

/// Draws up to M traversable cells in the half-plane facing the target
/// (positive dot product of cell - base with target - base), then crosses each
/// with the pitch grid. Base yaw points at the target centroid.
/// Candidate id = position_index * pitch_samples + pitch_index.
/// Throws std::invalid_argument for an empty traversable set.
std::vector<CandidateView> sample_candidates_elevation(const TraversableSet& trav, const ElevationMap& map,
                                                       const Pose3d& current_base, const Vector3& target_centroid,
                                                       const ElevationSamplerConfig& config, std::uint64_t seed);

struct ShellSamplerConfig {
  std::vector<double> radii = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  int per_shell = 100;
  RobotModel robot;
};

/// Cameras uniform on upper hemispheres around the centroid, each looking at
/// it. No terrain or collision checks. `pitch` holds the raw downward look
/// angle, which may exceed the robot's working range.
std::vector<CandidateView> sample_candidates_shell(const Vector3& centroid, const ShellSamplerConfig& config,
                                                   std::uint64_t seed);

/// Camera body pose at `position` whose x axis points at `target`.
Pose3d look_at(const Vector3& position, const Vector3& target);

}  // namespace oanbv
