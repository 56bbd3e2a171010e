#include "oanbv/scene.hpp"

#include "oanbv/observation.hpp"
#include "oanbv/random.hpp"
#include "oanbv/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oanbv {

std::string_view family_name(ScenarioFamily f) { return f == ScenarioFamily::indoor ? "indoor" : "outdoor"; }

ScenarioFamily parse_family(std::string_view name) {
  if (name == "indoor") return ScenarioFamily::indoor;
  if (name == "outdoor") return ScenarioFamily::outdoor;
  throw std::invalid_argument("unknown scenario family '" + std::string(name) + "' (expected indoor or outdoor)");
}

// --- Terrain ---------------------------------------------------------------

bool Terrain::contains(double x, double y) const {
  return x >= origin_x && x <= max_x() && y >= origin_y && y <= max_y();
}

double Terrain::height_at(double x, double y) const {
  const double gx = std::clamp((x - origin_x) / resolution, 0.0, double(cells_x));
  const double gy = std::clamp((y - origin_y) / resolution, 0.0, double(cells_y));
  const int i = std::min(int(gx), cells_x - 1);
  const int j = std::min(int(gy), cells_y - 1);
  const double fx = gx - i, fy = gy - j;
  const double h00 = vertex_height(i, j), h10 = vertex_height(i + 1, j);
  const double h01 = vertex_height(i, j + 1), h11 = vertex_height(i + 1, j + 1);
  // Lower triangle (00, 10, 01) when fx + fy <= 1, else upper (11, 01, 10).
  if (fx + fy <= 1.0) return h00 + fx * (h10 - h00) + fy * (h01 - h00);
  return h11 + (1.0 - fx) * (h01 - h11) + (1.0 - fy) * (h10 - h11);
}

// --- Box -------------------------------------------------------------------

Vector3 Box::to_local(const Vector3& p) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vector3 d = p - center;
  return Vector3(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
}

bool Box::contains(const Vector3& p, double margin) const {
  const Vector3 q = to_local(p).cwiseAbs();
  return (q.array() <= (half_extents.array() + margin)).all();
}

bool Box::footprint_contains(double x, double y, double margin) const {
  const Vector3 q = to_local(Vector3(x, y, center.z())).cwiseAbs();
  return q.x() <= half_extents.x() + margin && q.y() <= half_extents.y() + margin;
}

double Box::distance(const Vector3& p) const {
  const Vector3 q = (to_local(p).cwiseAbs() - half_extents).cwiseMax(0.0);
  return q.norm();
}

std::optional<double> Box::intersect(const Vector3& origin, const Vector3& dir, double t_max) const {
  const Vector3 o = to_local(origin);
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vector3 d(c * dir.x() + s * dir.y(), -s * dir.x() + c * dir.y(), dir.z());
  double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > half_extents[a]) return std::nullopt;
      continue;
    }
    double tn = (-half_extents[a] - o[a]) / d[a];
    double tf = (half_extents[a] - o[a]) / d[a];
    if (tn > tf) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return std::nullopt;
  }
  const double t = t0 > 1e-9 ? t0 : t1;
  if (t <= 1e-9 || t > t_max) return std::nullopt;
  return t;
}

bool Scene::inside_occluder(const Vector3& p, double margin) const {
  return std::any_of(occluders.begin(), occluders.end(), [&](const Box& b) { return b.contains(p, margin); });
}

void rebuild_target(Scene& scene) {
  scene.target = make_humanoid(scene.target_spec.angles, scene.target_spec.height).transformed(scene.target_spec.pose);
}

// --- Generation ------------------------------------------------------------

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Terrain make_terrain(ScenarioFamily family, Rng& rng) {
  Terrain t;
  const int nx = t.cells_x + 1, ny = t.cells_y + 1;
  t.heights.assign(std::size_t(nx) * ny, 0.0);
  if (family == ScenarioFamily::indoor) return t;

  struct Wave {
    double amp, kx, ky, phase;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 2; ++k) {
    const double amp = rng.uniform(0.02, 0.06);
    const double wavelength = rng.uniform(2.5, 7.0);
    const double dir = rng.uniform(0.0, kTwoPi);
    waves.push_back({amp, kTwoPi / wavelength * std::cos(dir), kTwoPi / wavelength * std::sin(dir),
                     rng.uniform(0.0, kTwoPi)});
  }
  struct Mound {
    double x, y, amp, sigma;
  };
  std::vector<Mound> mounds;
  const int n_mounds = rng.uniform_int(2, 4);
  for (int k = 0; k < n_mounds; ++k) {
    mounds.push_back({rng.uniform(-7.0, 7.0), rng.uniform(-7.0, 7.0), rng.uniform(0.1, 0.35), rng.uniform(0.8, 1.8)});
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = t.origin_x + i * t.resolution, y = t.origin_y + j * t.resolution;
      double h = 0.0;
      for (const auto& w : waves) h += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
      for (const auto& m : mounds) {
        const double r2 = (x - m.x) * (x - m.x) + (y - m.y) * (y - m.y);
        h += m.amp * std::exp(-r2 / (2.0 * m.sigma * m.sigma));
      }
      t.heights[std::size_t(j) * nx + i] = h;
    }
  }
  return t;
}

// Rests a box on the terrain, sunk slightly below the lowest footprint corner.
Box ground_box(const Terrain& terrain, double x, double y, double yaw, double length, double width, double height) {
  Box b;
  b.yaw = yaw;
  b.half_extents = Vector3(0.5 * length, 0.5 * width, 0.5 * height);
  const double c = std::cos(yaw), s = std::sin(yaw);
  double base = terrain.height_at(x, y);
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double lx = sx * b.half_extents.x(), ly = sy * b.half_extents.y();
      base = std::min(base, terrain.height_at(x + c * lx - s * ly, y + s * lx + c * ly));
    }
  }
  base -= 0.02;
  b.center = Vector3(x, y, base + b.half_extents.z());
  return b;
}

double min_distance_to_mesh(const Box& box, const LabeledMesh& mesh) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& v : mesh.vertices) d = std::min(d, box.distance(v));
  return d;
}

JointAngles standing_angles(Rng& rng) {
  JointAngles a;
  a.left_shoulder = rng.uniform(-1.45, -0.5);
  a.right_shoulder = rng.uniform(-1.45, -0.5);
  a.left_elbow = rng.uniform(0.0, 1.0);
  a.right_elbow = rng.uniform(0.0, 1.0);
  a.left_hip = rng.uniform(-0.3, 0.35);
  a.right_hip = rng.uniform(-0.3, 0.35);
  a.left_knee = rng.uniform(0.0, 0.4);
  a.right_knee = rng.uniform(0.0, 0.4);
  return a;
}

// One layout attempt; nullopt when it fails a rejection test.
std::optional<Scene> try_layout(ScenarioFamily family, std::uint64_t seed, int attempt, const SceneGenConfig& cfg) {
  Rng rng(mix_seed(seed, std::uint64_t(family), std::uint64_t(attempt)));
  Scene scene;
  scene.family = family;
  scene.seed = seed;
  scene.terrain = make_terrain(family, rng);

  // Target near the origin.
  const double tx = rng.uniform(-0.5, 0.5), ty = rng.uniform(-0.5, 0.5);
  const double t_yaw = rng.uniform(0.0, kTwoPi);
  scene.target_spec.angles = standing_angles(rng);
  scene.target_spec.height = rng.uniform(1.55, 1.9);
  scene.target_spec.pose = Pose3d(rot_z(t_yaw), Vector3(tx, ty, scene.terrain.height_at(tx, ty) - 0.02));
  rebuild_target(scene);
  const Vector3 centroid = scene.target.centroid();

  // Spawn on a ring around the target, facing it.
  const double bearing = rng.uniform(0.0, kTwoPi);
  const double dist = rng.uniform(2.5, 4.0);
  const double sx = tx + dist * std::cos(bearing), sy = ty + dist * std::sin(bearing);
  const Vector3 spawn(sx, sy, scene.terrain.height_at(sx, sy) + cfg.robot.standing_height);
  const double yaw = std::atan2(centroid.y() - sy, centroid.x() - sx) + rng.normal(0.0, 0.05);
  scene.spawn_base = base_pose(spawn, yaw);
  const Vector3 cam_pos = scene.spawn_base * cfg.robot.mount.translation();
  const double horiz = std::hypot(centroid.x() - cam_pos.x(), centroid.y() - cam_pos.y());
  const double pitch = std::atan2(cam_pos.z() - centroid.z(), horiz) + rng.normal(0.0, 0.05);
  scene.spawn_pitch = std::clamp(pitch, cfg.robot.pitch_min, cfg.robot.pitch_max);

  // Primary occluder across the line of sight.
  const Vector2 along = Vector2(tx - sx, ty - sy).normalized();
  const Vector2 across(-along.y(), along.x());
  const double frac = rng.uniform(0.35, 0.7);
  const double line_yaw = std::atan2(along.y(), along.x());
  const bool outdoor = family == ScenarioFamily::outdoor;
  Vector2 at = Vector2(sx, sy) + frac * dist * along;
  if (rng.bernoulli(0.5)) {
    // Low wall.
    at += rng.normal(0.0, 0.25) * across;
    const double width = rng.uniform(1.0, 2.0) * (outdoor ? 1.2 : 1.0);
    scene.occluders.push_back(ground_box(scene.terrain, at.x(), at.y(), line_yaw, rng.uniform(0.1, 0.25), width,
                                         rng.uniform(0.6, 1.1)));
  } else {
    // Tall pillar covering one side of the body.
    const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
    at += side * rng.uniform(0.1, 0.45) * across;
    scene.occluders.push_back(ground_box(scene.terrain, at.x(), at.y(), line_yaw, rng.uniform(0.3, 0.6),
                                         rng.uniform(0.4, 0.8), rng.uniform(2.0, 2.6)));
  }

  // Clutter.
  const int n_clutter = outdoor ? rng.uniform_int(6, 10) : rng.uniform_int(3, 5);
  const double size_lo = outdoor ? 0.5 : 0.3, size_hi = outdoor ? 2.0 : 1.0;
  for (int k = 0; k < n_clutter; ++k) {
    for (int tries = 0; tries < 20; ++tries) {
      const double x = rng.uniform(-6.5, 6.5), y = rng.uniform(-6.5, 6.5);
      const Box b = ground_box(scene.terrain, x, y, rng.uniform(0.0, std::numbers::pi), rng.uniform(size_lo, size_hi),
                               rng.uniform(size_lo, size_hi), rng.uniform(size_lo, size_hi));
      if (b.footprint_contains(sx, sy, 0.6)) continue;
      if (min_distance_to_mesh(b, scene.target) < 0.3) continue;
      scene.occluders.push_back(b);
      break;
    }
  }

  // Rejection tests.
  for (const auto& b : scene.occluders) {
    if (b.footprint_contains(sx, sy, 0.4)) return std::nullopt;
    if (min_distance_to_mesh(b, scene.target) < 0.05) return std::nullopt;
  }
  const Pose3d cam = optical_pose(scene.spawn_camera(cfg.robot));
  if (scene.inside_occluder(cam.translation(), 0.05)) return std::nullopt;

  const auto in_frame = vertices_in_frame(scene.target, cam, cfg.K);
  long n_in = 0;
  for (auto f : in_frame) n_in += f;
  if (double(n_in) < cfg.min_in_frame * double(scene.target.vertex_count())) return std::nullopt;

  const RayCaster caster(scene);
  const double occluded = occluded_vertex_fraction(caster, cam);
  if (occluded < cfg.occlusion_min || occluded > cfg.occlusion_max) return std::nullopt;

  const auto kv = oracle_keypoint_visibility(caster, cam, cfg.K);
  const int n_vis = kv.n_vis;
  if (n_vis < cfg.detection.tau_kp || kv.ratio() > cfg.max_spawn_keypoint_ratio) return std::nullopt;
  if (!oracle_detection(target_area_fast(caster, cam, cfg.K, cfg.stride), n_vis, cfg.detection)) return std::nullopt;
  return scene;
}

}  // namespace

Scene generate_scene(ScenarioFamily family, std::uint64_t seed, const SceneGenConfig& config) {
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    if (auto scene = try_layout(family, seed, attempt, config)) return std::move(*scene);
  }
  throw GenerationError("generate_scene: no admissible " + std::string(family_name(family)) + " layout for seed " +
                        std::to_string(seed) + " after " + std::to_string(config.max_attempts) + " attempts");
}

}  // namespace oanbv
