#pragma once

#include "oanbv/icp.hpp"
#include "oanbv/observation.hpp"

#include <cstdint>
#include <vector>

namespace oanbv {

struct LiftedMask {
  PointCloud p_tgt;
  PointCloud p_bg;
};

/// Splits a camera-frame cloud by the mask value at each point's floored
/// projection. Points behind the camera or off the image go to p_bg.
LiftedMask lift_mask(const PointCloud& cloud, const CameraIntrinsics& K, const std::vector<std::uint8_t>& mask);

struct PartVisibilityConfig {
  double frac_threshold = 0.25;
  /// Probability of flipping each part's membership (classifier noise).
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
  /// A vertex counts as seen when the first target surface along its ray is
  /// within this distance of it.
  double surface_tolerance = 0.01;
};

/// Parts with at least frac_threshold of their vertices in frame and seen
/// (not hidden by terrain, boxes, or the target itself).
PartSet visible_parts(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K,
                      const PartVisibilityConfig& config = {});

/// Indices of the vertices whose part is in `parts`, ascending.
std::vector<std::uint32_t> extract_part_submesh(const LabeledMesh& mesh, PartSet parts);

struct PerturbConfig {
  double depth_sigma = 0.4;
  double lateral_sigma = 0.05;
  double rot_sigma = 0.05;
};

/// Rigidly moves `gt` (world frame): a rotation about its centroid, then a
/// translation mostly along the ray from the camera (optical pose `cam`)
/// to the centroid.
LabeledMesh perturb_initial_mesh(const LabeledMesh& gt, const Pose3d& cam, std::uint64_t seed,
                                 const PerturbConfig& config = {});

/// Rigid transform applied by perturb_initial_mesh, about the world origin.
Pose3d perturbation_transform(const LabeledMesh& gt, const Pose3d& cam, std::uint64_t seed,
                              const PerturbConfig& config = {});

struct AlignConfig {
  IcpConfig icp;
  std::size_t normal_k = 16;
  int boundary_noise = 0;
  std::uint64_t seed = 0;
  /// Shift the ICP source so its centroid meets the target-point centroid first.
  bool center_init = false;
  std::size_t min_target_points = 10;
};

struct AlignmentResult {
  Pose3d T_icp;
  /// T_icp applied to the initial mesh (camera frame).
  LabeledMesh aligned;
  PointCloud p_tgt;
  PointCloud p_bg;
  PartSet visible_parts;
  std::vector<double> residual_history;
  /// Too few target points; the initial mesh is returned unchanged.
  bool skipped = false;
  /// ICP broke down; the initial mesh is returned unchanged.
  bool degenerate = false;
};

/// Segments the observation, estimates target normals, registers the
/// `parts` submesh (the full mesh when `parts` is empty) to the target points
/// and moves the whole mesh. `init_mesh` and all outputs are in the
/// observation's camera frame.
AlignmentResult align_target(const Observation& obs, const LabeledMesh& init_mesh, PartSet parts,
                             const AlignConfig& config = {});

/// Mean per-vertex Euclidean distance. Throws std::invalid_argument on a
/// vertex-count mismatch.
double mpvpe(const LabeledMesh& a, const LabeledMesh& b);

}  // namespace oanbv
