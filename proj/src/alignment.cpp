#include "oanbv/alignment.hpp"

#include "oanbv/normals.hpp"
#include "oanbv/random.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>

namespace oanbv {

LiftedMask lift_mask(const PointCloud& cloud, const CameraIntrinsics& K, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != std::size_t(K.pixel_count())) throw std::invalid_argument("lift_mask: mask size mismatch");
  LiftedMask out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vector3& p = cloud.points[i];
    bool is_target = false;
    if (auto pr = project(K, p); pr && in_frame(K, pr->u, pr->v)) {
      is_target = mask[std::size_t(pixel_index(pr->v)) * K.width + pixel_index(pr->u)] != 0;
    }
    PointCloud& dst = is_target ? out.p_tgt : out.p_bg;
    dst.points.push_back(p);
    if (cloud.has_labels()) dst.labels.push_back(cloud.labels[i]);
  }
  return out;
}

PartSet visible_parts(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K,
                      const PartVisibilityConfig& cfg) {
  const LabeledMesh& mesh = caster.scene().target;
  const auto in_frame = vertices_in_frame(mesh, cam, K);
  const Vector3 origin = cam.translation();
  std::array<long, kPartCount> seen{}, total{};
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto part = std::size_t(mesh.part_of[i]);
    ++total[part];
    if (!in_frame[i]) continue;
    const Vector3 delta = mesh.vertices[i] - origin;
    const double dist = delta.norm();
    auto hit = caster.first_hit(origin, delta / dist, dist + cfg.surface_tolerance);
    if (!hit || (hit->kind == SurfaceKind::target && hit->t >= dist - cfg.surface_tolerance)) ++seen[part];
  }
  PartSet out;
  for (int p = 0; p < kPartCount; ++p) {
    if (total[p] > 0 && double(seen[p]) >= cfg.frac_threshold * double(total[p])) out.insert(PartLabel(p));
  }
  if (cfg.flip_probability > 0.0) {
    Rng rng(mix_seed(cfg.seed, 0xf11b));
    for (int p = 0; p < kPartCount; ++p) {
      if (!rng.bernoulli(cfg.flip_probability)) continue;
      if (out.contains(PartLabel(p))) {
        out.erase(PartLabel(p));
      } else {
        out.insert(PartLabel(p));
      }
    }
  }
  return out;
}

std::vector<std::uint32_t> extract_part_submesh(const LabeledMesh& mesh, PartSet parts) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < mesh.part_of.size(); ++i) {
    if (parts.contains(mesh.part_of[i])) out.push_back(i);
  }
  return out;
}

Pose3d perturbation_transform(const LabeledMesh& gt, const Pose3d& cam, std::uint64_t seed,
                              const PerturbConfig& cfg) {
  if (cfg.depth_sigma < 0 || cfg.lateral_sigma < 0 || cfg.rot_sigma < 0) {
    throw std::invalid_argument("perturb_initial_mesh: sigmas must be non-negative");
  }
  const Vector3 c = gt.centroid();
  Vector3 ray = c - cam.translation();
  ray = ray.norm() > 0 ? Vector3(ray.normalized()) : Vector3::UnitZ();
  Vector3 e1 = ray.cross(Vector3::UnitZ());
  if (e1.norm() < 1e-9) e1 = ray.cross(Vector3::UnitX());
  e1.normalize();
  const Vector3 e2 = ray.cross(e1);

  Rng rng(mix_seed(seed, 0x9e7));
  const Vector3 t = rng.normal(0.0, cfg.depth_sigma) * ray + rng.normal(0.0, cfg.lateral_sigma) * e1 +
                    rng.normal(0.0, cfg.lateral_sigma) * e2;
  Vector3 w;
  for (int a = 0; a < 3; ++a) w[a] = rng.normal(0.0, cfg.rot_sigma);
  Matrix3 R = Matrix3::Identity();
  if (w.norm() > 0.0) R = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
  return Pose3d(R, c - R * c + t);
}

LabeledMesh perturb_initial_mesh(const LabeledMesh& gt, const Pose3d& cam, std::uint64_t seed,
                                 const PerturbConfig& cfg) {
  if (cfg.depth_sigma == 0 && cfg.lateral_sigma == 0 && cfg.rot_sigma == 0) return gt;
  return gt.transformed(perturbation_transform(gt, cam, seed, cfg));
}

AlignmentResult align_target(const Observation& obs, const LabeledMesh& init_mesh, PartSet parts,
                             const AlignConfig& cfg) {
  AlignmentResult out;
  out.visible_parts = parts;
  auto lifted = lift_mask(obs.cloud, obs.K, oracle_segmentation(obs, cfg.boundary_noise, cfg.seed));
  out.p_bg = std::move(lifted.p_bg);
  out.aligned = init_mesh;

  if (lifted.p_tgt.size() < std::max(cfg.min_target_points, cfg.normal_k)) {
    out.p_tgt = std::move(lifted.p_tgt);
    out.skipped = true;
    return out;
  }
  out.p_tgt = estimate_normals(lifted.p_tgt, cfg.normal_k, Vector3::Zero());

  std::vector<std::uint32_t> idx = parts.empty() ? std::vector<std::uint32_t>{} : extract_part_submesh(init_mesh, parts);
  if (idx.empty()) {
    idx.resize(init_mesh.vertex_count());
    for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  const auto all_normals = vertex_normals(init_mesh);
  std::vector<Vector3> src, src_n;
  src.reserve(idx.size());
  src_n.reserve(idx.size());
  Vector3 src_c = Vector3::Zero();
  for (auto i : idx) {
    src.push_back(init_mesh.vertices[i]);
    src_n.push_back(all_normals[i]);
    src_c += init_mesh.vertices[i];
  }
  src_c /= double(src.size());

  Pose3d init;
  if (cfg.center_init) {
    Vector3 tgt_c = Vector3::Zero();
    for (const auto& p : out.p_tgt.points) tgt_c += p;
    tgt_c /= double(out.p_tgt.size());
    init = Pose3d::from_translation(tgt_c - src_c);
  }

  try {
    IcpResult icp = point_to_plane_icp(src, src_n, out.p_tgt, init, cfg.icp);
    out.T_icp = icp.transform;
    out.residual_history = std::move(icp.residual_history);
    out.aligned = init_mesh.transformed(out.T_icp);
  } catch (const DegenerateRegistration&) {
    out.degenerate = true;
  } catch (const std::invalid_argument&) {
    // Fewer than 10 usable normals.
    out.skipped = true;
  }
  return out;
}

double mpvpe(const LabeledMesh& a, const LabeledMesh& b) {
  if (a.vertex_count() != b.vertex_count()) throw std::invalid_argument("mpvpe: vertex counts differ");
  if (a.vertex_count() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.vertex_count(); ++i) sum += (a.vertices[i] - b.vertices[i]).norm();
  return sum / double(a.vertex_count());
}

}  // namespace oanbv
