#include "oanbv/raycast.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace oanbv {

TriangleBvh::TriangleBvh(std::vector<std::array<Vector3, 3>> triangles, std::vector<std::uint32_t> ids) {
  const auto n = static_cast<std::uint32_t>(triangles.size());
  if (n == 0) return;
  std::vector<Vector3> centroids(n);
  std::vector<std::array<Vector3, 2>> bounds(n);
  tris_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& t = triangles[i];
    centroids[i] = (t[0] + t[1] + t[2]) / 3.0;
    bounds[i] = {t[0].cwiseMin(t[1]).cwiseMin(t[2]), t[0].cwiseMax(t[1]).cwiseMax(t[2])};
    tris_[i] = Tri{t[0], t[1] - t[0], t[2] - t[0], ids[i]};
  }
  nodes_.reserve(2 * n);
  build(0, n, centroids, bounds);
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vector3>& centroids,
                                 std::vector<std::array<Vector3, 2>>& bounds) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{});
  Vector3 lo = Vector3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  Vector3 clo = lo, chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(bounds[i][0]);
    hi = hi.cwiseMax(bounds[i][1]);
    clo = clo.cwiseMin(centroids[i]);
    chi = chi.cwiseMax(centroids[i]);
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;
  int axis = 0;
  const double extent = (chi - clo).maxCoeff(&axis);
  if (end - begin <= 4 || extent <= 0.0) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return centroids[a][axis] < centroids[b][axis] || (centroids[a][axis] == centroids[b][axis] && a < b);
  });
  // Apply the permutation to the triangle range.
  std::vector<Tri> tris(end - begin);
  std::vector<Vector3> cents(end - begin);
  std::vector<std::array<Vector3, 2>> bnds(end - begin);
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    tris[k] = tris_[order[k]];
    cents[k] = centroids[order[k]];
    bnds[k] = bounds[order[k]];
  }
  std::copy(tris.begin(), tris.end(), tris_.begin() + begin);
  std::copy(cents.begin(), cents.end(), centroids.begin() + begin);
  std::copy(bnds.begin(), bnds.end(), bounds.begin() + begin);

  build(begin, mid, centroids, bounds);
  const std::uint32_t right = build(mid, end, centroids, bounds);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

RayCaster::RayCaster(const Scene& scene) : scene_(&scene) {
  const Terrain& tr = scene.terrain;
  std::vector<std::array<Vector3, 3>> tris;
  std::vector<std::uint32_t> ids;
  tris.reserve(std::size_t(2) * tr.cells_x * tr.cells_y);
  auto vtx = [&](int i, int j) {
    return Vector3(tr.origin_x + i * tr.resolution, tr.origin_y + j * tr.resolution, tr.vertex_height(i, j));
  };
  for (int j = 0; j < tr.cells_y; ++j) {
    for (int i = 0; i < tr.cells_x; ++i) {
      const Vector3 v00 = vtx(i, j), v10 = vtx(i + 1, j), v01 = vtx(i, j + 1), v11 = vtx(i + 1, j + 1);
      tris.push_back({v00, v10, v01});
      tris.push_back({v11, v01, v10});
      ids.push_back(std::uint32_t(tris.size() - 2));
      ids.push_back(std::uint32_t(tris.size() - 1));
    }
  }
  terrain_ = TriangleBvh(std::move(tris), std::move(ids));

  const LabeledMesh& mesh = scene.target;
  std::vector<std::array<Vector3, 3>> ttris;
  std::vector<std::uint32_t> tids;
  ttris.reserve(mesh.faces.size());
  face_part_.reserve(mesh.faces.size());
  for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    ttris.push_back({mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]});
    tids.push_back(f);
    face_part_.push_back(mesh.part_of[face[0]]);
  }
  target_ = TriangleBvh(std::move(ttris), std::move(tids));
}

std::optional<RayHit> RayCaster::first_hit(const Vector3& origin, const Vector3& dir, double t_max,
                                           const RayFilter& filter) const {
  std::optional<RayHit> best;
  double limit = t_max;
  if (filter.occluders) {
    for (std::uint32_t i = 0; i < scene_->occluders.size(); ++i) {
      if (auto t = scene_->occluders[i].intersect(origin, dir, limit)) {
        if (!best || *t < best->t) {
          best = RayHit{*t, SurfaceKind::occluder, i, PartLabel::torso};
          limit = *t;
        }
      }
    }
  }
  if (filter.terrain) {
    if (auto h = terrain_.closest(origin, dir, limit, [](std::uint32_t) { return true; })) {
      if (!best || h->t < best->t) {
        best = RayHit{h->t, SurfaceKind::terrain, h->id, PartLabel::torso};
        limit = h->t;
      }
    }
  }
  if (filter.target) {
    const PartSet ignored = filter.ignored_parts;
    auto accept = [&](std::uint32_t f) { return !ignored.contains(face_part_[f]); };
    if (auto h = target_.closest(origin, dir, limit, accept)) {
      if (!best || h->t < best->t) best = RayHit{h->t, SurfaceKind::target, h->id, face_part_[h->id]};
    }
  }
  return best;
}

bool RayCaster::any_hit(const Vector3& origin, const Vector3& dir, double t_max, const RayFilter& filter) const {
  if (filter.occluders) {
    for (const auto& box : scene_->occluders) {
      if (box.intersect(origin, dir, t_max)) return true;
    }
  }
  if (filter.terrain && terrain_.any(origin, dir, t_max, [](std::uint32_t) { return true; })) return true;
  if (filter.target) {
    const PartSet ignored = filter.ignored_parts;
    return target_.any(origin, dir, t_max, [&](std::uint32_t f) { return !ignored.contains(face_part_[f]); });
  }
  return false;
}

bool RayCaster::segment_blocked(const Vector3& from, const Vector3& to, double end_clearance,
                                const RayFilter& filter) const {
  const Vector3 d = to - from;
  const double len = d.norm();
  if (len <= end_clearance || len == 0.0) return false;
  return any_hit(from, d / len, len - end_clearance, filter);
}

}  // namespace oanbv
