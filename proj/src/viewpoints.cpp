#include "oanbv/viewpoints.hpp"

#include "oanbv/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oanbv {

std::vector<double> pitch_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("pitch_grid: count must be positive");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1);
  out.back() = hi;
  return out;
}

std::vector<CandidateView> sample_candidates_elevation(const TraversableSet& trav, const ElevationMap& map,
                                                       const Pose3d& current_base, const Vector3& target_centroid,
                                                       const ElevationSamplerConfig& cfg, std::uint64_t seed) {
  if (trav.empty()) throw std::invalid_argument("sample_candidates_elevation: empty traversable set");
  if (cfg.M < 1) throw std::invalid_argument("sample_candidates_elevation: M must be positive");
  const Vector2 base_xy = current_base.translation().head<2>();
  const Vector2 bearing = target_centroid.head<2>() - base_xy;
  const double h = cfg.robot.standing_height;

  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < trav.cells.size(); ++k) {
    const Vector3& s = trav.cells[k].surface;
    const Vector2 xy = s.head<2>();
    if ((xy - base_xy).dot(bearing) <= 0.0) continue;
    const Vector2 to_target = target_centroid.head<2>() - xy;
    if (to_target.norm() < cfg.min_target_distance) continue;
    // The camera sits ahead of the base; the ground under it must be known and low.
    const Pose3d base = base_pose(Vector3(xy.x(), xy.y(), s.z() + h), std::atan2(to_target.y(), to_target.x()));
    const Vector3 cam = base * cfg.robot.mount.translation();
    const auto cell = map.cell_of(cam.x(), cam.y());
    if (!cell || !map.is_valid(cell->first, cell->second)) continue;
    if (map.at(cell->first, cell->second) > cam.z() - cfg.camera_clearance) continue;
    eligible.push_back(k);
  }

  // Partial Fisher-Yates: the first `take` entries become a uniform draw
  // without replacement.
  Rng rng(mix_seed(seed, 0xe1e));
  const std::size_t take = std::min<std::size_t>(std::size_t(cfg.M), eligible.size());
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t r = k + rng.index(eligible.size() - k);
    std::swap(eligible[k], eligible[r]);
  }

  const auto pitches = pitch_grid(cfg.robot.pitch_min, cfg.robot.pitch_max, cfg.pitch_samples);
  std::vector<CandidateView> out;
  out.reserve(take * pitches.size());
  for (std::size_t k = 0; k < take; ++k) {
    const Vector3& s = trav.cells[eligible[k]].surface;
    const Vector2 d = target_centroid.head<2>() - s.head<2>();
    const Pose3d base = base_pose(Vector3(s.x(), s.y(), s.z() + h), std::atan2(d.y(), d.x()));
    for (std::size_t p = 0; p < pitches.size(); ++p) {
      CandidateView c;
      c.base = base;
      c.pitch = pitches[p];
      c.cam = camera_from_base(base, pitches[p], cfg.robot.mount, cfg.robot.pitch_min, cfg.robot.pitch_max);
      c.position_index = int(k);
      c.pitch_index = int(p);
      c.id = int(k * pitches.size() + p);
      out.push_back(c);
    }
  }
  return out;
}

Pose3d look_at(const Vector3& position, const Vector3& target) {
  const Vector3 x = (target - position).normalized();
  Vector3 y = Vector3::UnitZ().cross(x);
  if (y.norm() < 1e-9) y = Vector3::UnitY();
  y.normalize();
  const Vector3 z = x.cross(y);
  Matrix3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return Pose3d(R, position);
}

std::vector<CandidateView> sample_candidates_shell(const Vector3& centroid, const ShellSamplerConfig& cfg,
                                                   std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5e11));
  std::vector<CandidateView> out;
  out.reserve(cfg.radii.size() * std::size_t(std::max(cfg.per_shell, 0)));
  for (std::size_t r = 0; r < cfg.radii.size(); ++r) {
    for (int k = 0; k < cfg.per_shell; ++k) {
      // Uniform on the upper unit hemisphere: z uniform in [0, 1) (Archimedes).
      const double z = rng.uniform();
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Vector3 position = centroid + cfg.radii[r] * Vector3(rho * std::cos(phi), rho * std::sin(phi), z);
      CandidateView c;
      c.cam = look_at(position, centroid);
      const Vector3 fwd = c.cam.rotation().col(0);
      const double yaw = std::atan2(fwd.y(), fwd.x());
      c.pitch = std::asin(std::clamp(-fwd.z(), -1.0, 1.0));
      c.base = base_pose(position - rot_z(yaw) * cfg.robot.mount.translation(), yaw);
      c.position_index = int(r) * cfg.per_shell + k;
      c.pitch_index = 0;
      c.id = c.position_index;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace oanbv
