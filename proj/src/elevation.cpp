#include "oanbv/elevation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oanbv {

std::optional<std::pair<int, int>> ElevationMap::cell_of(double x, double y) const {
  const double gx = std::floor((x - origin_x()) / resolution);
  const double gy = std::floor((y - origin_y()) / resolution);
  if (gx < 0 || gy < 0 || gx >= size || gy >= size) return std::nullopt;
  return std::make_pair(int(gx), int(gy));
}

long ElevationMap::valid_count() const {
  long n = 0;
  for (auto v : valid) n += v;
  return n;
}

ElevationMap build_elevation_map(const RayCaster& caster, const Pose3d& base, const Vector3& visibility_source,
                                 const ElevationConfig& config) {
  if (config.size <= 0 || !(config.resolution > 0) || config.samples_per_axis < 1) {
    throw std::invalid_argument("build_elevation_map: bad grid configuration");
  }
  const Scene& scene = caster.scene();
  ElevationMap map;
  map.center = base.translation().head<2>();
  map.resolution = config.resolution;
  map.size = config.size;
  const std::size_t n = std::size_t(map.size) * map.size;
  map.height.assign(n, std::numeric_limits<double>::quiet_NaN());
  map.valid.assign(n, 0);

  const int s = config.samples_per_axis;
  for (int j = 0; j < map.size; ++j) {
    for (int i = 0; i < map.size; ++i) {
      const Vector2 c = map.cell_center(i, j);
      if (!scene.terrain.contains(c.x(), c.y())) continue;
      double h = -std::numeric_limits<double>::infinity();
      for (int b = 0; b < s; ++b) {
        for (int a = 0; a < s; ++a) {
          const double x = map.origin_x() + (i + (a + 0.5) / s) * map.resolution;
          const double y = map.origin_y() + (j + (b + 0.5) / s) * map.resolution;
          h = std::max(h, scene.terrain.height_at(x, y));
          for (const Box& box : scene.occluders) {
            if (box.footprint_contains(x, y)) h = std::max(h, box.top());
          }
        }
      }
      const Vector3 surface(c.x(), c.y(), h);
      const bool under_robot = (c - map.center).norm() <= config.footprint_radius;
      if (under_robot ||
          !caster.segment_blocked(visibility_source, surface, config.visibility_tolerance)) {
        map.valid[map.index(i, j)] = 1;
        map.height[map.index(i, j)] = h;
      }
    }
  }
  return map;
}

TraversableSet traversable_cells(const ElevationMap& map, const Vector2& base_xy, double base_z, double h_step) {
  const auto start = map.cell_of(base_xy.x(), base_xy.y());
  if (!start) throw std::runtime_error("traversable_cells: base lies off the elevation map");
  const auto [i0, j0] = *start;
  if (!map.is_valid(i0, j0)) throw std::runtime_error("traversable_cells: base cell is invalid");
  if (std::abs(map.at(i0, j0) - base_z) > h_step) {
    throw std::runtime_error("traversable_cells: base height inconsistent with the map");
  }

  TraversableSet out;
  out.member.assign(map.valid.size(), 0);
  auto push = [&](int i, int j) {
    out.member[map.index(i, j)] = 1;
    const Vector2 c = map.cell_center(i, j);
    out.cells.push_back({i, j, Vector3(c.x(), c.y(), map.at(i, j))});
  };
  push(i0, j0);
  // Breadth-first: the cell list doubles as the queue.
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};
  for (std::size_t head = 0; head < out.cells.size(); ++head) {
    const int ci = out.cells[head].i, cj = out.cells[head].j;
    const double ch = map.at(ci, cj);
    for (int k = 0; k < 4; ++k) {
      const int ni = ci + di[k], nj = cj + dj[k];
      if (ni < 0 || nj < 0 || ni >= map.size || nj >= map.size) continue;
      const std::size_t idx = map.index(ni, nj);
      if (out.member[idx] || !map.valid[idx]) continue;
      if (std::abs(map.height[idx] - ch) > h_step) continue;
      push(ni, nj);
    }
  }
  return out;
}

}  // namespace oanbv
