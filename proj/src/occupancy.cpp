#include "oanbv/occupancy.hpp"

#include <stdexcept>

namespace oanbv {

OccupancyGrid::OccupancyGrid(const Vector3& origin, double voxel_size, int nx, int ny, int nz)
    : origin_(origin), voxel_(voxel_size), nx_(nx), ny_(ny), nz_(nz) {
  if (!(voxel_size > 0) || nx <= 0 || ny <= 0 || nz <= 0) throw std::invalid_argument("OccupancyGrid: bad geometry");
  state_.assign(std::size_t(nx) * ny * nz, std::uint8_t(VoxelState::unknown));
}

OccupancyGrid OccupancyGrid::covering(const Scene& scene, double voxel_size, double z_min, double z_max) {
  const Terrain& t = scene.terrain;
  const int nx = int(std::ceil((t.max_x() - t.origin_x) / voxel_size));
  const int ny = int(std::ceil((t.max_y() - t.origin_y) / voxel_size));
  const int nz = int(std::ceil((z_max - z_min) / voxel_size));
  return OccupancyGrid(Vector3(t.origin_x, t.origin_y, z_min), voxel_size, nx, ny, nz);
}

void OccupancyGrid::set(int i, int j, int k, VoxelState s) {
  auto& cur = state_[index(i, j, k)];
  if (VoxelState(cur) == VoxelState::occupied) return;
  if (VoxelState(cur) == VoxelState::free && s == VoxelState::unknown) return;
  cur = std::uint8_t(s);
}

bool OccupancyGrid::voxel_of(const Vector3& p, int& i, int& j, int& k) const {
  const Vector3 g = (p - origin_) / voxel_;
  if (!(g.x() >= 0 && g.y() >= 0 && g.z() >= 0 && g.x() < nx_ && g.y() < ny_ && g.z() < nz_)) return false;
  i = int(g.x());
  j = int(g.y());
  k = int(g.z());
  return true;
}

long OccupancyGrid::count(VoxelState s) const {
  long n = 0;
  for (auto v : state_) n += (VoxelState(v) == s);
  return n;
}

void integrate_observation(OccupancyGrid& grid, const Observation& obs) {
  const Vector3 origin = obs.cam.translation();
  for (const auto& pc : obs.cloud.points) {
    const Vector3 p = obs.cam * pc;
    int ei = -1, ej = -1, ek = -1;
    const bool end_inside = grid.voxel_of(p, ei, ej, ek);
    traverse_voxels(grid, origin, p, [&](int i, int j, int k) {
      if (end_inside && i == ei && j == ej && k == ek) return false;
      if (grid.at(i, j, k) == VoxelState::unknown) grid.set(i, j, k, VoxelState::free);
      return true;
    });
    if (end_inside) grid.set(ei, ej, ek, VoxelState::occupied);
  }
}

long volumetric_gain(const CandidateView& cand, const OccupancyGrid& grid, const CameraIntrinsics& K, int ray_budget,
                     double max_range) {
  if (ray_budget < 1) return 0;
  const int cols = std::max(1, int(std::lround(std::sqrt(double(ray_budget) * K.width / K.height))));
  const int rows = std::max(1, ray_budget / cols);
  const Pose3d cam = cand.optical();
  const Vector3 origin = cam.translation();
  std::vector<std::size_t> seen;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double u = (c + 0.5) * K.width / cols, v = (r + 0.5) * K.height / rows;
      const Vector3 dir = cam.rotation() * pixel_ray(K, u, v);
      traverse_voxels(grid, origin, origin + max_range * dir, [&](int i, int j, int k) {
        const VoxelState s = grid.at(i, j, k);
        if (s == VoxelState::occupied) return false;
        if (s == VoxelState::unknown) seen.push_back(grid.index(i, j, k));
        return true;
      });
    }
  }
  std::sort(seen.begin(), seen.end());
  return long(std::unique(seen.begin(), seen.end()) - seen.begin());
}

}  // namespace oanbv
