#pragma once

#include "oanbv/observation.hpp"
#include "oanbv/viewpoints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oanbv {

enum class VoxelState : std::uint8_t { unknown = 0, free = 1, occupied = 2 };

/// Dense voxel grid. Integration only moves unknown -> free/occupied and
/// free -> occupied.
class OccupancyGrid {
 public:
  OccupancyGrid(const Vector3& origin, double voxel_size, int nx, int ny, int nz);

  /// Grid covering the scene's terrain extent and a height band.
  static OccupancyGrid covering(const Scene& scene, double voxel_size = 0.1, double z_min = -1.0, double z_max = 3.0);

  const Vector3& origin() const { return origin_; }
  double voxel_size() const { return voxel_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  bool in_bounds(int i, int j, int k) const { return i >= 0 && j >= 0 && k >= 0 && i < nx_ && j < ny_ && k < nz_; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(k) * ny_ + j) * nx_ + i; }
  VoxelState at(int i, int j, int k) const { return VoxelState(state_[index(i, j, k)]); }
  void set(int i, int j, int k, VoxelState s);
  /// Voxel containing p, or false when outside.
  bool voxel_of(const Vector3& p, int& i, int& j, int& k) const;
  long count(VoxelState s) const;
  const std::vector<std::uint8_t>& states() const { return state_; }

 private:
  Vector3 origin_;
  double voxel_;
  int nx_, ny_, nz_;
  std::vector<std::uint8_t> state_;
};

/// Visits the voxels a segment passes through (Amanatides-Woo), in order,
/// clipped to the grid. The callback returns false to stop.
template <typename Visit>
void traverse_voxels(const OccupancyGrid& grid, const Vector3& from, const Vector3& to, Visit&& visit);

/// Carves free space along the camera-to-point ray of every cloud point and
/// marks each endpoint voxel occupied.
void integrate_observation(OccupancyGrid& grid, const Observation& obs);

/// Distinct unknown voxels seen by `ray_budget` rays spread over the image,
/// each stopping at its first occupied voxel or after `max_range` meters.
long volumetric_gain(const CandidateView& cand, const OccupancyGrid& grid, const CameraIntrinsics& K,
                     int ray_budget = 96, double max_range = 8.0);

// ---------------------------------------------------------------------------

template <typename Visit>
void traverse_voxels(const OccupancyGrid& grid, const Vector3& from, const Vector3& to, Visit&& visit) {
  const Vector3 d = to - from;
  const double len = d.norm();
  if (!(len > 0.0)) return;
  const double s = grid.voxel_size();
  const Vector3 lo = grid.origin();
  const Vector3 hi = lo + s * Vector3(grid.nx(), grid.ny(), grid.nz());
  // Clip the segment to the grid box.
  double t0 = 0.0, t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (from[a] < lo[a] || from[a] >= hi[a]) return;
      continue;
    }
    double ta = (lo[a] - from[a]) / d[a], tb = (hi[a] - from[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  }
  const Vector3 start = from + t0 * d;
  int idx[3], step[3], n[3] = {grid.nx(), grid.ny(), grid.nz()};
  double t_max[3], t_delta[3];
  for (int a = 0; a < 3; ++a) {
    idx[a] = std::clamp(int(std::floor((start[a] - lo[a]) / s)), 0, n[a] - 1);
    if (d[a] > 0) {
      step[a] = 1;
      t_max[a] = (lo[a] + (idx[a] + 1) * s - from[a]) / d[a];
      t_delta[a] = s / d[a];
    } else if (d[a] < 0) {
      step[a] = -1;
      t_max[a] = (lo[a] + idx[a] * s - from[a]) / d[a];
      t_delta[a] = -s / d[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  while (true) {
    if (!visit(idx[0], idx[1], idx[2])) return;
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > t1) return;
    idx[a] += step[a];
    if (idx[a] < 0 || idx[a] >= n[a]) return;
    t_max[a] += t_delta[a];
  }
}

}  // namespace oanbv
