#include "oanbv/observation.hpp"

#include "oanbv/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oanbv {

long Observation::mask_pixels() const {
  long n = 0;
  for (auto m : gt_mask) n += m;
  return n;
}

namespace {

void fill_block(std::vector<std::uint8_t>& mask, DepthImage& depth, const CameraIntrinsics& K, long u0, long v0,
                int stride, bool target, double z) {
  const long u1 = std::min<long>(u0 + stride, K.width), v1 = std::min<long>(v0 + stride, K.height);
  for (long v = v0; v < v1; ++v) {
    for (long u = u0; u < u1; ++u) {
      mask[std::size_t(v) * K.width + u] = target ? 1 : 0;
      depth.at(u, v) = z;
    }
  }
}

}  // namespace

Observation render_observation(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K, int stride) {
  if (stride < 1) throw std::invalid_argument("render_observation: stride must be >= 1");
  K.validate();
  Observation obs;
  obs.cam = cam;
  obs.K = K;
  obs.stride = stride;
  obs.gt_mask.assign(std::size_t(K.pixel_count()), 0);
  obs.depth = DepthImage(K.width, K.height);

  const Matrix3 R = cam.rotation();
  const Vector3 origin = cam.translation();
  for (long v0 = 0; v0 < K.height; v0 += stride) {
    for (long u0 = 0; u0 < K.width; u0 += stride) {
      ++obs.ray_count;
      const Vector3 d_cam = pixel_ray(K, u0 + 0.5, v0 + 0.5);
      const Vector3 d = R * d_cam;
      auto hit = caster.first_hit(origin, d, std::numeric_limits<double>::infinity());
      if (!hit) continue;
      const Vector3 p = hit->t * d_cam;
      const bool is_target = hit->kind == SurfaceKind::target;
      obs.cloud.points.push_back(p);
      obs.cloud.labels.push_back(is_target ? PointLabel::target : PointLabel::background);
      obs.target_ray_count += is_target;
      fill_block(obs.gt_mask, obs.depth, K, u0, v0, stride, is_target, p.z());
    }
  }
  return obs;
}

double target_area(const Observation& obs) { return double(obs.mask_pixels()) / double(obs.K.pixel_count()); }

double target_area_fast(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K, int stride) {
  const LabeledMesh& mesh = caster.scene().target;
  const Pose3d world_to_cam = cam.inverse();
  double umin = std::numeric_limits<double>::infinity(), vmin = umin, umax = -umin, vmax = -umin;
  bool behind = false;
  for (const auto& v : mesh.vertices) {
    auto pr = project(K, Vector3(world_to_cam * v));
    if (!pr) {
      behind = true;
      break;
    }
    umin = std::min(umin, pr->u);
    umax = std::max(umax, pr->u);
    vmin = std::min(vmin, pr->v);
    vmax = std::max(vmax, pr->v);
  }
  if (behind) return target_area(render_observation(caster, cam, K, stride));

  // Ray grid positions are multiples of `stride`; only those whose center can
  // fall inside the box need casting.
  auto first_block = [&](double lo) { return std::max<long>(0, long(std::floor((lo - 0.5) / stride)) * stride); };
  const long u_begin = first_block(umin), v_begin = first_block(vmin);
  const long u_end = std::min<long>(K.width, long(std::ceil(umax)) + 1);
  const long v_end = std::min<long>(K.height, long(std::ceil(vmax)) + 1);
  const Matrix3 R = cam.rotation();
  const Vector3 origin = cam.translation();
  long pixels = 0;
  for (long v0 = v_begin; v0 < v_end; v0 += stride) {
    for (long u0 = u_begin; u0 < u_end; u0 += stride) {
      const Vector3 d = R * pixel_ray(K, u0 + 0.5, v0 + 0.5);
      auto hit = caster.first_hit(origin, d, std::numeric_limits<double>::infinity());
      if (hit && hit->kind == SurfaceKind::target) {
        pixels += (std::min<long>(u0 + stride, K.width) - u0) * (std::min<long>(v0 + stride, K.height) - v0);
      }
    }
  }
  return double(pixels) / double(K.pixel_count());
}

std::vector<std::uint8_t> morph_mask(const std::vector<std::uint8_t>& mask, int width, int height, int radius) {
  if (radius == 0) return mask;
  const bool dilate = radius > 0;
  const int r = std::abs(radius);
  // Separable square structuring element: rows, then columns. Pixels outside
  // the image count as background.
  std::vector<std::uint8_t> tmp(mask.size()), out(mask.size());
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      bool acc = !dilate;
      for (int k = u - r; k <= u + r; ++k) {
        const bool val = (k >= 0 && k < width) ? mask[std::size_t(v) * width + k] != 0 : false;
        if (dilate ? val : !val) {
          acc = dilate;
          break;
        }
      }
      tmp[std::size_t(v) * width + u] = acc;
    }
  }
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      bool acc = !dilate;
      for (int k = v - r; k <= v + r; ++k) {
        const bool val = (k >= 0 && k < height) ? tmp[std::size_t(k) * width + u] != 0 : false;
        if (dilate ? val : !val) {
          acc = dilate;
          break;
        }
      }
      out[std::size_t(v) * width + u] = acc;
    }
  }
  return out;
}

std::vector<std::uint8_t> oracle_segmentation(const Observation& obs, int boundary_noise, std::uint64_t seed) {
  if (boundary_noise < 0) throw std::invalid_argument("oracle_segmentation: boundary_noise must be >= 0");
  if (boundary_noise == 0) return obs.gt_mask;
  Rng rng(mix_seed(seed, 0x5e6));
  const int radius = rng.uniform_int(-boundary_noise, boundary_noise);
  return morph_mask(obs.gt_mask, obs.K.width, obs.K.height, radius);
}

KeypointVisibility oracle_keypoint_visibility(const RayCaster& caster, const Pose3d& cam, const CameraIntrinsics& K) {
  KeypointVisibility out;
  const LabeledMesh& mesh = caster.scene().target;
  const Pose3d world_to_cam = cam.inverse();
  const Vector3 origin = cam.translation();
  for (int k = 0; k < kKeypointCount; ++k) {
    const Vector3& kp = mesh.keypoints[k];
    auto pr = project(K, Vector3(world_to_cam * kp));
    if (!pr || !in_frame(K, pr->u, pr->v)) continue;
    const Vector3 delta = kp - origin;
    const double dist = delta.norm();
    const Vector3 dir = delta / dist;
    if (caster.any_hit(origin, dir, dist, RayFilter{true, true, false, {}})) continue;
    if (dist > kSelfOcclusionMargin) {
      RayFilter self{false, false, true, keypoint_local_parts(Keypoint(k))};
      if (caster.any_hit(origin, dir, dist - kSelfOcclusionMargin, self)) continue;
    }
    out.visible[k] = true;
    ++out.n_vis;
  }
  return out;
}

bool oracle_detection(double area, int n_vis, const DetectionThresholds& th) {
  return area >= th.tau_area && n_vis >= th.tau_kp;
}

bool oracle_detection(const Observation& obs, const RayCaster& caster, const DetectionThresholds& th) {
  return oracle_detection(target_area(obs), oracle_keypoint_visibility(caster, obs.cam, obs.K).n_vis, th);
}

std::vector<std::uint8_t> vertices_in_frame(const LabeledMesh& mesh, const Pose3d& cam, const CameraIntrinsics& K) {
  const Pose3d world_to_cam = cam.inverse();
  std::vector<std::uint8_t> out(mesh.vertices.size(), 0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    auto pr = project(K, Vector3(world_to_cam * mesh.vertices[i]));
    out[i] = pr && in_frame(K, pr->u, pr->v);
  }
  return out;
}

std::vector<std::uint8_t> vertices_blocked(const RayCaster& caster, const Pose3d& cam, const LabeledMesh& mesh) {
  const Vector3 origin = cam.translation();
  std::vector<std::uint8_t> out(mesh.vertices.size(), 0);
  const RayFilter world_only{true, true, false, {}};
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    out[i] = caster.segment_blocked(origin, mesh.vertices[i], 1e-9, world_only);
  }
  return out;
}

double occluded_vertex_fraction(const RayCaster& caster, const Pose3d& cam) {
  const LabeledMesh& mesh = caster.scene().target;
  if (mesh.vertices.empty()) return 0.0;
  const auto blocked = vertices_blocked(caster, cam, mesh);
  long n = 0;
  for (auto b : blocked) n += b;
  return double(n) / double(mesh.vertices.size());
}

}  // namespace oanbv
