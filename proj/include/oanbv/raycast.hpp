#pragma once

#include "oanbv/scene.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace oanbv {

/// Bounding-volume hierarchy over triangles, each carrying a caller id.
class TriangleBvh {
 public:
  struct Hit {
    double t;
    std::uint32_t id;
  };

  TriangleBvh() = default;
  TriangleBvh(std::vector<std::array<Vector3, 3>> triangles, std::vector<std::uint32_t> ids);

  bool empty() const { return tris_.empty(); }

  /// Closest hit in (t_min, t_max] among triangles whose id passes `accept`.
  template <typename Accept>
  std::optional<Hit> closest(const Vector3& origin, const Vector3& dir, double t_max, Accept&& accept) const;

  template <typename Accept>
  bool any(const Vector3& origin, const Vector3& dir, double t_max, Accept&& accept) const;

 private:
  struct Tri {
    Vector3 v0, e1, e2;
    std::uint32_t id;
  };
  struct Node {
    Vector3 lo = Vector3::Zero();
    Vector3 hi = Vector3::Zero();
    std::uint32_t first = 0;  // leaf: first triangle; inner: right child
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vector3>& centroids,
                      std::vector<std::array<Vector3, 2>>& bounds);
  static bool slab(const Node& n, const Vector3& o, const Vector3& inv, double t_max);
  static std::optional<double> intersect(const Tri& tri, const Vector3& o, const Vector3& d, double t_max);

  std::vector<Tri> tris_;
  std::vector<Node> nodes_;
};

enum class SurfaceKind : std::uint8_t { terrain, occluder, target };

struct RayHit {
  double t = 0.0;
  SurfaceKind kind = SurfaceKind::terrain;
  /// Occluder index, or target face index.
  std::uint32_t index = 0;
  PartLabel part = PartLabel::torso;
};

/// Which surfaces a ray may stop at.
struct RayFilter {
  bool terrain = true;
  bool occluders = true;
  bool target = true;
  /// Target faces of these parts are transparent.
  PartSet ignored_parts;
};

/// Exact ray queries against a Scene's terrain, boxes and target mesh.
/// Immutable after construction; safe to share across threads.
class RayCaster {
 public:
  explicit RayCaster(const Scene& scene);

  /// `dir` must be unit length; hits lie in (0, t_max].
  std::optional<RayHit> first_hit(const Vector3& origin, const Vector3& dir, double t_max,
                                  const RayFilter& filter = {}) const;
  bool any_hit(const Vector3& origin, const Vector3& dir, double t_max, const RayFilter& filter = {}) const;

  /// True when the segment from `from` to `to` is blocked before reaching `to`
  /// by anything the filter admits, leaving `end_clearance` meters at the end.
  bool segment_blocked(const Vector3& from, const Vector3& to, double end_clearance,
                       const RayFilter& filter = {}) const;

  const Scene& scene() const { return *scene_; }

 private:
  const Scene* scene_;
  TriangleBvh terrain_;
  TriangleBvh target_;
  std::vector<PartLabel> face_part_;
};

// ---------------------------------------------------------------------------

// Zero components become a huge finite slope: 1/-0 = -inf would turn a ray
// grazing a box face into NaN slab distances.
inline Vector3 inverse_direction(const Vector3& dir) {
  Vector3 inv;
  for (int a = 0; a < 3; ++a) inv[a] = dir[a] == 0.0 ? 1e300 : 1.0 / dir[a];
  return inv;
}

inline bool TriangleBvh::slab(const Node& n, const Vector3& o, const Vector3& inv, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double tn = (n.lo[a] - o[a]) * inv[a];
    double tf = (n.hi[a] - o[a]) * inv[a];
    if (tn > tf) std::swap(tn, tf);
    t0 = tn > t0 ? tn : t0;
    t1 = tf < t1 ? tf : t1;
    if (t0 > t1) return false;
  }
  return true;
}

inline std::optional<double> TriangleBvh::intersect(const Tri& tri, const Vector3& o, const Vector3& d,
                                                    double t_max) {
  const Vector3 p = d.cross(tri.e2);
  const double det = tri.e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vector3 s = o - tri.v0;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vector3 q = s.cross(tri.e1);
  const double v = d.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = tri.e2.dot(q) * inv_det;
  if (t <= 1e-9 || t > t_max) return std::nullopt;
  return t;
}

template <typename Accept>
std::optional<TriangleBvh::Hit> TriangleBvh::closest(const Vector3& origin, const Vector3& dir, double t_max,
                                                     Accept&& accept) const {
  if (nodes_.empty()) return std::nullopt;
  const Vector3 inv = inverse_direction(dir);
  std::optional<Hit> best;
  double limit = t_max;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t ni = stack[--top];
    const Node& n = nodes_[ni];
    if (!slab(n, origin, inv, limit)) continue;
    if (n.count > 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        const Tri& tri = tris_[i];
        if (!accept(tri.id)) continue;
        if (auto t = intersect(tri, origin, dir, limit)) {
          // Equal distances resolve to the lower id so results never depend on traversal order.
          if (!best || *t < best->t || (*t == best->t && tri.id < best->id)) {
            best = Hit{*t, tri.id};
            limit = *t;
          }
        }
      }
    } else {
      const std::uint32_t left = ni + 1, right = n.first;
      // Visit the nearer child first.
      const Vector3 cl = 0.5 * (nodes_[left].lo + nodes_[left].hi);
      const Vector3 cr = 0.5 * (nodes_[right].lo + nodes_[right].hi);
      if ((cl - origin).dot(dir) < (cr - origin).dot(dir)) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    }
  }
  return best;
}

template <typename Accept>
bool TriangleBvh::any(const Vector3& origin, const Vector3& dir, double t_max, Accept&& accept) const {
  if (nodes_.empty()) return false;
  const Vector3 inv = inverse_direction(dir);
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t ni = stack[--top];
    const Node& n = nodes_[ni];
    if (!slab(n, origin, inv, t_max)) continue;
    if (n.count > 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        if (accept(tris_[i].id) && intersect(tris_[i], origin, dir, t_max)) return true;
      }
    } else {
      stack[top++] = n.first;
      stack[top++] = ni + 1;
    }
  }
  return false;
}

}  // namespace oanbv
