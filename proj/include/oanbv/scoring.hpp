#pragma once

#include "oanbv/viewpoints.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oanbv {

struct Weights {
  double w_v = 0.03;
  double w_a = 0.14;
  double w_o = 0.83;

  /// Throws std::invalid_argument unless all are >= 0 and they sum to 1.
  void validate() const;
};

struct EvaluatorConfig {
  /// A vertex is occluded when the buffer depth < vertex depth * (1 - margin).
  double margin = 0.02;
  int splat_radius = 1;
  /// Selection only considers candidates with s_v at or above this, unless
  /// none qualifies. Without it a view framing a few unoccluded vertices
  /// outscores a complete one.
  double min_visible = 0.98;
};

struct ScoredCandidate {
  CandidateView candidate;
  long n_m = 0;
  long n_in = 0;
  long n_occ = 0;
  double s_v = 0.0;
  double s_a = 0.0;
  double s_o = 0.0;
  double s_total = 0.0;
};

/// The three terms and their weighted sum from raw counts. s_total is 0 when
/// n_in is 0.
ScoredCandidate score_counts(const CandidateView& cand, long n_m, long n_in, long n_occ, long n_I, const Weights& w);

/// Vertex counts for one camera: how many project into the frame and how
/// many of those sit behind the splatted scene points.
struct VisibilityCounts {
  long n_in = 0;
  long n_occ = 0;
};

VisibilityCounts count_visibility(const Pose3d& cam_optical, std::span<const Vector3> mesh_vertices,
                                  std::span<const Vector3> scene_points, const CameraIntrinsics& K,
                                  const EvaluatorConfig& config = {});

/// Scene points grouped by voxel with a bounding sphere per group, so a camera
/// can skip groups that cannot reach the target's image window. Point order
/// changes; splatting does not depend on it.
class PointChunks {
 public:
  struct Chunk {
    Vector3 center;
    double radius;
    std::uint32_t begin, end;
  };

  explicit PointChunks(std::span<const Vector3> points, double cell = 0.25);

  std::span<const Vector3> points() const { return points_; }
  std::span<const Chunk> chunks() const { return chunks_; }

 private:
  std::vector<Vector3> points_;
  std::vector<Chunk> chunks_;
};

/// Same counts as the span overload.
VisibilityCounts count_visibility(const Pose3d& cam_optical, std::span<const Vector3> mesh_vertices,
                                  const PointChunks& scene, const CameraIntrinsics& K,
                                  const EvaluatorConfig& config = {});

/// Scores one candidate. Mesh and scene points are in world coordinates.
ScoredCandidate evaluate_viewpoint(const CandidateView& cand, std::span<const Vector3> mesh_vertices,
                                   std::span<const Vector3> scene_points, const CameraIntrinsics& K, const Weights& w,
                                   const EvaluatorConfig& config = {});

/// Same results as evaluate_viewpoint on each candidate, in input order.
std::vector<ScoredCandidate> evaluate_candidates(std::span<const CandidateView> cands,
                                                 std::span<const Vector3> mesh_vertices,
                                                 std::span<const Vector3> scene_points, const CameraIntrinsics& K,
                                                 const Weights& w, const EvaluatorConfig& config = {});

/// Highest s_total among candidates with s_v >= min_visible (all of them when
/// none qualifies); ties go to the lower candidate id. Throws
/// std::invalid_argument on an empty list.
const ScoredCandidate& select_best(std::span<const ScoredCandidate> scored, double min_visible = 0.0);

/// Index of the largest gain; ties go to the lower candidate id.
std::size_t select_max_gain(std::span<const CandidateView> cands, std::span<const double> gains);

/// Predicted points further than `novelty` from every observed target point.
std::vector<Vector3> novel_points(std::span<const Vector3> predicted, std::span<const Vector3> observed_target,
                                  double novelty = 0.05);

/// Number of predicted points that would be newly seen from `cand`: in frame,
/// not behind the observed scene points, and away from the observed target.
long pred_gain(const CandidateView& cand, std::span<const Vector3> predicted, std::span<const Vector3> observed_target,
               std::span<const Vector3> scene_points, const CameraIntrinsics& K, const EvaluatorConfig& config = {},
               double novelty = 0.05);

/// pred_gain for points already passed through novel_points.
long pred_gain_novel(const CandidateView& cand, std::span<const Vector3> novel, std::span<const Vector3> scene_points,
                     const CameraIntrinsics& K, const EvaluatorConfig& config = {});
long pred_gain_novel(const CandidateView& cand, std::span<const Vector3> novel, const PointChunks& scene,
                     const CameraIntrinsics& K, const EvaluatorConfig& config = {});

}  // namespace oanbv
