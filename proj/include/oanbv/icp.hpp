#pragma once

#include "oanbv/kdtree.hpp"
#include "oanbv/point_cloud.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace oanbv {

struct IcpConfig {
  int max_iter = 50;
  /// Correspondences further apart than this are dropped.
  double max_corr = 0.3;
  /// Stop once the RMS residual improves by less than this.
  double tol = 1e-6;
  /// With source normals, pairs whose normals disagree more than this
  /// (cosine below) are dropped; this keeps back faces out.
  double min_normal_cos = 0.0;
};

struct IcpResult {
  /// Total transform mapping source points onto the target (includes init).
  Pose3d transform;
  /// RMS point-to-plane residual at every evaluated iterate. The last entry
  /// belongs to the returned transform.
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
};

class DegenerateRegistration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point-to-plane ICP with small-angle linearization. Target normals are
/// required; only points whose normal is valid take part. `source_normals`
/// may be empty. Returns the iterate with the lowest residual.
/// Throws std::invalid_argument when the target has fewer than 10 usable
/// points or the source is empty, and DegenerateRegistration when an
/// iteration finds fewer than 6 correspondences.
IcpResult point_to_plane_icp(std::span<const Vector3> source, std::span<const Vector3> source_normals,
                             const PointCloud& target, const Pose3d& init, const IcpConfig& config = {});

}  // namespace oanbv
