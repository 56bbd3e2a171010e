#include "oanbv/scoring.hpp"

#include "oanbv/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <stdexcept>

namespace oanbv {

void Weights::validate() const {
  if (w_v < 0 || w_a < 0 || w_o < 0) throw std::invalid_argument("weights must be non-negative");
  if (std::abs(w_v + w_a + w_o - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
}

ScoredCandidate score_counts(const CandidateView& cand, long n_m, long n_in, long n_occ, long n_I, const Weights& w) {
  ScoredCandidate s;
  s.candidate = cand;
  s.n_m = n_m;
  s.n_in = n_in;
  s.n_occ = n_occ;
  if (n_in <= 0 || n_m <= 0) return s;
  s.s_v = double(n_in) / double(n_m);
  s.s_a = double(n_in) / double(n_I);
  s.s_o = 1.0 - double(n_occ) / double(n_in);
  s.s_total = w.w_v * s.s_v + w.w_a * s.s_a + w.w_o * s.s_o;
  return s;
}

namespace {

struct PixelDepth {
  long u, v;
  double z;
};

// Floored pixel of a camera-frame point, if it lands in the image.
inline bool to_pixel(const CameraIntrinsics& K, const Vector3& p, long& iu, long& iv) {
  const auto pr = project(K, p);
  if (!pr) return false;
  const double u = std::floor(pr->u), v = std::floor(pr->v);
  if (!(u >= 0.0 && u < K.width && v >= 0.0 && v < K.height)) return false;
  iu = long(u);
  iv = long(v);
  return true;
}

// Shared by the plain and chunked entry points. `for_each_batch(keep)` hands
// every scene point that might reach the window to `splat`; `keep(center, r)`
// tells it whether a sphere can touch the window at all.
template <typename Batches>
VisibilityCounts count_visibility_impl(const Pose3d& cam_optical, std::span<const Vector3> mesh_vertices,
                                       const CameraIntrinsics& K, const EvaluatorConfig& cfg,
                                       Batches&& for_each_batch) {
  const Pose3d inv = cam_optical.inverse();

  std::vector<PixelDepth> inside;
  inside.reserve(mesh_vertices.size());
  long umin = K.width, umax = -1, vmin = K.height, vmax = -1;
  for (const auto& x : mesh_vertices) {
    const Vector3 p = inv * x;
    long iu, iv;
    if (!to_pixel(K, p, iu, iv)) continue;
    inside.push_back({iu, iv, p.z()});
    umin = std::min(umin, iu);
    umax = std::max(umax, iu);
    vmin = std::min(vmin, iv);
    vmax = std::max(vmax, iv);
  }
  VisibilityCounts out;
  out.n_in = long(inside.size());
  if (inside.empty()) return out;

  // The depth buffer only needs the pixels the counted vertices occupy. A
  // point splats onto it when its floored pixel is within splat_radius of
  // that window, exactly as render_depth would.
  const long r = cfg.splat_radius;
  const long bw = umax - umin + 1, bh = vmax - vmin + 1;
  std::vector<double> buf(std::size_t(bw * bh), std::numeric_limits<double>::infinity());
  const double lo_u = double(umin - r), hi_u = double(umax + r + 1);
  const double lo_v = double(vmin - r), hi_v = double(vmax + r + 1);
  // Division-free reject with a pixel of slack before the exact projection.
  const double cu0 = (lo_u - 1.0 - K.cx) / K.fx, cu1 = (hi_u + 1.0 - K.cx) / K.fx;
  const double cv0 = (lo_v - 1.0 - K.cy) / K.fy, cv1 = (hi_v + 1.0 - K.cy) / K.fy;
  const auto splat = [&](const Vector3& x) {
    const Vector3 pc = inv * x;
    const double zc = pc.z();
    if (!(zc > 0.0) || pc.x() < cu0 * zc || pc.x() > cu1 * zc || pc.y() < cv0 * zc || pc.y() > cv1 * zc) return;
    const auto pr = project(K, pc);
    if (!pr) return;
    if (!(pr->u >= lo_u && pr->u < hi_u && pr->v >= lo_v && pr->v < hi_v)) return;
    const long iu = pixel_index(pr->u), iv = pixel_index(pr->v);
    const double z = pr->depth;
    const long u0 = std::max(umin, iu - r), u1 = std::min(umax, iu + r);
    const long v0 = std::max(vmin, iv - r), v1 = std::min(vmax, iv + r);
    for (long yy = v0; yy <= v1; ++yy) {
      double* row = buf.data() + (yy - vmin) * bw;
      for (long xx = u0; xx <= u1; ++xx) row[xx - umin] = std::min(row[xx - umin], z);
    }
  };
  // Planes of the slack frustum, as (normal . p >= 0) in the camera frame.
  const auto plane_ok = [](double a, double b, double s, double radius) {
    return a - s * b >= -radius * std::sqrt(1.0 + s * s);
  };
  const auto keep = [&](const Vector3& center, double radius) {
    const Vector3 c = inv * center;
    return c.z() > -radius && plane_ok(c.x(), c.z(), cu0, radius) && plane_ok(-c.x(), -c.z(), cu1, radius) &&
           plane_ok(c.y(), c.z(), cv0, radius) && plane_ok(-c.y(), -c.z(), cv1, radius);
  };
  for_each_batch(keep, splat);

  const double keep_frac = 1.0 - cfg.margin;
  for (const auto& pd : inside) {
    if (buf[std::size_t((pd.v - vmin) * bw + (pd.u - umin))] < pd.z * keep_frac) ++out.n_occ;
  }
  return out;
}

}  // namespace

PointChunks::PointChunks(std::span<const Vector3> points, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("PointChunks: cell size must be positive");
  struct Keyed {
    std::int64_t i, j, k;
    std::uint32_t idx;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(points.size());
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Vector3& p = points[n];
    keyed.push_back({std::int64_t(std::floor(p.x() / cell)), std::int64_t(std::floor(p.y() / cell)),
                     std::int64_t(std::floor(p.z() / cell)), std::uint32_t(n)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.i, a.j, a.k, a.idx) < std::tie(b.i, b.j, b.k, b.idx);
  });
  points_.reserve(points.size());
  for (std::size_t n = 0; n < keyed.size();) {
    std::size_t m = n;
    Vector3 lo = points[keyed[n].idx], hi = lo;
    while (m < keyed.size() && keyed[m].i == keyed[n].i && keyed[m].j == keyed[n].j && keyed[m].k == keyed[n].k) {
      const Vector3& p = points[keyed[m].idx];
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      points_.push_back(p);
      ++m;
    }
    chunks_.push_back({0.5 * (lo + hi), 0.5 * (hi - lo).norm(), std::uint32_t(n), std::uint32_t(m)});
    n = m;
  }
}

VisibilityCounts count_visibility(const Pose3d& cam_optical, std::span<const Vector3> mesh_vertices,
                                  std::span<const Vector3> scene_points, const CameraIntrinsics& K,
                                  const EvaluatorConfig& cfg) {
  return count_visibility_impl(cam_optical, mesh_vertices, K, cfg, [&](auto&&, auto&& splat) {
    for (const auto& x : scene_points) splat(x);
  });
}

VisibilityCounts count_visibility(const Pose3d& cam_optical, std::span<const Vector3> mesh_vertices,
                                  const PointChunks& scene, const CameraIntrinsics& K, const EvaluatorConfig& cfg) {
  return count_visibility_impl(cam_optical, mesh_vertices, K, cfg, [&](auto&& keep, auto&& splat) {
    const auto pts = scene.points();
    for (const auto& c : scene.chunks()) {
      if (!keep(c.center, c.radius)) continue;
      for (std::uint32_t n = c.begin; n < c.end; ++n) splat(pts[n]);
    }
  });
}

ScoredCandidate evaluate_viewpoint(const CandidateView& cand, std::span<const Vector3> mesh_vertices,
                                   std::span<const Vector3> scene_points, const CameraIntrinsics& K, const Weights& w,
                                   const EvaluatorConfig& cfg) {
  const auto c = count_visibility(cand.optical(), mesh_vertices, scene_points, K, cfg);
  return score_counts(cand, long(mesh_vertices.size()), c.n_in, c.n_occ, K.pixel_count(), w);
}

std::vector<ScoredCandidate> evaluate_candidates(std::span<const CandidateView> cands,
                                                 std::span<const Vector3> mesh_vertices,
                                                 std::span<const Vector3> scene_points, const CameraIntrinsics& K,
                                                 const Weights& w, const EvaluatorConfig& cfg) {
  const PointChunks chunks(scene_points);
  std::vector<ScoredCandidate> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    const auto counts = count_visibility(c.optical(), mesh_vertices, chunks, K, cfg);
    out.push_back(score_counts(c, long(mesh_vertices.size()), counts.n_in, counts.n_occ, K.pixel_count(), w));
  }
  return out;
}

const ScoredCandidate& select_best(std::span<const ScoredCandidate> scored, double min_visible) {
  if (scored.empty()) throw std::invalid_argument("select_best: no candidates");
  const bool gated = std::any_of(scored.begin(), scored.end(), [&](const auto& s) { return s.s_v >= min_visible; });
  const ScoredCandidate* best = nullptr;
  for (const auto& s : scored) {
    if (gated && s.s_v < min_visible) continue;
    if (!best || s.s_total > best->s_total || (s.s_total == best->s_total && s.candidate.id < best->candidate.id)) {
      best = &s;
    }
  }
  return *best;
}

std::size_t select_max_gain(std::span<const CandidateView> cands, std::span<const double> gains) {
  if (cands.empty() || cands.size() != gains.size()) throw std::invalid_argument("select_max_gain: bad input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (gains[i] > gains[best] || (gains[i] == gains[best] && cands[i].id < cands[best].id)) best = i;
  }
  return best;
}

std::vector<Vector3> novel_points(std::span<const Vector3> predicted, std::span<const Vector3> observed_target,
                                  double novelty) {
  if (observed_target.empty()) return {predicted.begin(), predicted.end()};
  const KdTree tree(observed_target);
  std::vector<Vector3> out;
  for (const auto& p : predicted) {
    if (tree.nearest(p).distance > novelty) out.push_back(p);
  }
  return out;
}

long pred_gain_novel(const CandidateView& cand, std::span<const Vector3> novel, std::span<const Vector3> scene_points,
                     const CameraIntrinsics& K, const EvaluatorConfig& cfg) {
  const auto c = count_visibility(cand.optical(), novel, scene_points, K, cfg);
  return c.n_in - c.n_occ;
}

long pred_gain_novel(const CandidateView& cand, std::span<const Vector3> novel, const PointChunks& scene,
                     const CameraIntrinsics& K, const EvaluatorConfig& cfg) {
  const auto c = count_visibility(cand.optical(), novel, scene, K, cfg);
  return c.n_in - c.n_occ;
}

long pred_gain(const CandidateView& cand, std::span<const Vector3> predicted, std::span<const Vector3> observed_target,
               std::span<const Vector3> scene_points, const CameraIntrinsics& K, const EvaluatorConfig& cfg,
               double novelty) {
  if (predicted.empty()) throw std::invalid_argument("pred_gain: empty prediction");
  const auto novel = novel_points(predicted, observed_target, novelty);
  return pred_gain_novel(cand, novel, scene_points, K, cfg);
}

}  // namespace oanbv
