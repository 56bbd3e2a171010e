#pragma once

#include "oanbv/raycast.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace oanbv {

struct ElevationConfig {
  int size = 128;
  double resolution = 0.06;
  /// Terrain samples per cell side; the cell keeps the highest.
  int samples_per_axis = 3;
  /// Cells within this radius of the base are under the robot and always known.
  double footprint_radius = 0.35;
  /// Slack at the end of a visibility ray so it may touch its own surface.
  double visibility_tolerance = 0.05;
};

/// Square 2.5D height grid centered on the robot base. Cell (i, j) covers
/// x in [x0 + i r, x0 + (i+1) r), y likewise; i runs along world x.
struct ElevationMap {
  Vector2 center = Vector2::Zero();
  double resolution = 0.06;
  int size = 128;
  /// NaN where invalid.
  std::vector<double> height;
  std::vector<std::uint8_t> valid;

  std::size_t index(int i, int j) const { return std::size_t(j) * size + i; }
  double origin_x() const { return center.x() - 0.5 * size * resolution; }
  double origin_y() const { return center.y() - 0.5 * size * resolution; }
  Vector2 cell_center(int i, int j) const {
    return Vector2(origin_x() + (i + 0.5) * resolution, origin_y() + (j + 0.5) * resolution);
  }
  /// Cell containing (x, y), if on the map.
  std::optional<std::pair<int, int>> cell_of(double x, double y) const;
  bool is_valid(int i, int j) const { return valid[index(i, j)] != 0; }
  double at(int i, int j) const { return height[index(i, j)]; }
  long valid_count() const;
};

/// Cell height is the highest terrain or box-top sample inside the cell. A
/// cell is valid when its surface point is visible from `visibility_source`
/// (terrain, boxes and the target all cast shadows), or lies under the robot.
ElevationMap build_elevation_map(const RayCaster& caster, const Pose3d& base, const Vector3& visibility_source,
                                 const ElevationConfig& config = {});

struct TraversableCell {
  int i = 0;
  int j = 0;
  Vector3 surface = Vector3::Zero();
};

struct TraversableSet {
  /// Flood-fill order, base cell first.
  std::vector<TraversableCell> cells;
  /// Per map cell: 1 when traversable.
  std::vector<std::uint8_t> member;

  bool empty() const { return cells.empty(); }
  std::size_t size() const { return cells.size(); }
};

/// 4-connected component of valid cells reachable from the base cell through
/// steps of at most `h_step`. `base_z` is the terrain height under the robot;
/// throws std::runtime_error when the base cell is invalid, off the map or
/// further than h_step from it.
TraversableSet traversable_cells(const ElevationMap& map, const Vector2& base_xy, double base_z,
                                 double h_step = 0.15);

}  // namespace oanbv
