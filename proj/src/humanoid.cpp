#include "oanbv/humanoid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oanbv {
namespace {

constexpr int kAround = 16;
constexpr int kCapRings = 3;

struct Segment {
  PartLabel part;
  Vector3 a;           // start of the axis
  Vector3 b;           // end of the axis
  double radius_x;     // cross-section half-width along the frame's first axis
  double radius_y;     // cross-section half-width along the frame's second axis
  double cap;          // cap extent along the axis
  int body_segments;   // cylinder subdivisions between a and b
};

void append_capsule(const Segment& s, LabeledMesh& mesh) {
  const Vector3 axis = (s.b - s.a).normalized();
  const Vector3 ref = std::abs(axis.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitZ();
  const Vector3 ex = ref.cross(axis).normalized();
  const Vector3 ey = axis.cross(ex);

  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  auto ring_point = [&](const Vector3& center, double rho, int j) {
    const double phi = 2.0 * std::numbers::pi * j / kAround;
    return Vector3(center + rho * (s.radius_x * std::cos(phi) * ex + s.radius_y * std::sin(phi) * ey));
  };

  mesh.vertices.push_back(s.a - s.cap * axis);
  // Bottom cap rings, from near the pole toward the equator.
  for (int k = 1; k <= kCapRings; ++k) {
    const double theta = 0.5 * std::numbers::pi * k / (kCapRings + 1);
    const Vector3 center = s.a - s.cap * std::cos(theta) * axis;
    for (int j = 0; j < kAround; ++j) mesh.vertices.push_back(ring_point(center, std::sin(theta), j));
  }
  for (int k = 0; k <= s.body_segments; ++k) {
    const Vector3 center = s.a + (s.b - s.a) * (double(k) / s.body_segments);
    for (int j = 0; j < kAround; ++j) mesh.vertices.push_back(ring_point(center, 1.0, j));
  }
  for (int k = kCapRings; k >= 1; --k) {
    const double theta = 0.5 * std::numbers::pi * k / (kCapRings + 1);
    const Vector3 center = s.b + s.cap * std::cos(theta) * axis;
    for (int j = 0; j < kAround; ++j) mesh.vertices.push_back(ring_point(center, std::sin(theta), j));
  }
  mesh.vertices.push_back(s.b + s.cap * axis);

  const int rings = 2 * kCapRings + s.body_segments + 1;
  const std::uint32_t bottom = base;
  const std::uint32_t top = base + 1 + std::uint32_t(rings * kAround);
  auto ring_vertex = [&](int r, int j) { return base + 1 + std::uint32_t(r * kAround + (j % kAround)); };

  for (int j = 0; j < kAround; ++j) mesh.faces.push_back({bottom, ring_vertex(0, j + 1), ring_vertex(0, j)});
  for (int r = 0; r + 1 < rings; ++r) {
    for (int j = 0; j < kAround; ++j) {
      const std::uint32_t a = ring_vertex(r, j), b = ring_vertex(r, j + 1);
      const std::uint32_t c = ring_vertex(r + 1, j + 1), d = ring_vertex(r + 1, j);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  for (int j = 0; j < kAround; ++j) mesh.faces.push_back({ring_vertex(rings - 1, j), ring_vertex(rings - 1, j + 1), top});

  mesh.part_of.insert(mesh.part_of.end(), mesh.vertices.size() - base, s.part);
}

void check_angle(double a) {
  if (!(std::abs(a) <= 0.5 * std::numbers::pi + 1e-12)) {
    throw std::invalid_argument("make_humanoid: joint angle outside [-90, 90] degrees");
  }
}

}  // namespace

std::string_view part_name(PartLabel part) {
  static constexpr std::array<std::string_view, kPartCount> names = {
      "head",           "torso",           "left_upper_arm", "left_lower_arm", "right_upper_arm",
      "right_lower_arm", "left_upper_leg", "left_lower_leg", "right_upper_leg", "right_lower_leg",
      "left_hand",      "right_hand",      "left_foot",      "right_foot"};
  return names[std::size_t(part)];
}

std::string_view keypoint_name(Keypoint kp) {
  static constexpr std::array<std::string_view, kKeypointCount> names = {
      "nose",       "left_eye",    "right_eye", "left_ear",   "right_ear",  "left_shoulder",
      "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip",
      "right_hip",  "left_knee",   "right_knee", "left_ankle", "right_ankle"};
  return names[std::size_t(kp)];
}

PartSet keypoint_local_parts(Keypoint kp) {
  using P = PartLabel;
  switch (kp) {
    case Keypoint::nose:
    case Keypoint::left_eye:
    case Keypoint::right_eye:
    case Keypoint::left_ear:
    case Keypoint::right_ear: return PartSet::of({P::head});
    case Keypoint::left_shoulder: return PartSet::of({P::torso, P::left_upper_arm});
    case Keypoint::right_shoulder: return PartSet::of({P::torso, P::right_upper_arm});
    case Keypoint::left_elbow: return PartSet::of({P::left_upper_arm, P::left_lower_arm});
    case Keypoint::right_elbow: return PartSet::of({P::right_upper_arm, P::right_lower_arm});
    case Keypoint::left_wrist: return PartSet::of({P::left_lower_arm, P::left_hand});
    case Keypoint::right_wrist: return PartSet::of({P::right_lower_arm, P::right_hand});
    case Keypoint::left_hip: return PartSet::of({P::torso, P::left_upper_leg});
    case Keypoint::right_hip: return PartSet::of({P::torso, P::right_upper_leg});
    case Keypoint::left_knee: return PartSet::of({P::left_upper_leg, P::left_lower_leg});
    case Keypoint::right_knee: return PartSet::of({P::right_upper_leg, P::right_lower_leg});
    case Keypoint::left_ankle: return PartSet::of({P::left_lower_leg, P::left_foot});
    case Keypoint::right_ankle: return PartSet::of({P::right_lower_leg, P::right_foot});
  }
  return {};
}

std::array<double, 8> JointAngles::as_array() const {
  return {left_shoulder, right_shoulder, left_elbow, right_elbow, left_hip, right_hip, left_knee, right_knee};
}

JointAngles JointAngles::from_array(const std::array<double, 8>& a) {
  return JointAngles{a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
}

Vector3 LabeledMesh::centroid() const {
  Vector3 c = Vector3::Zero();
  for (const auto& v : vertices) c += v;
  return vertices.empty() ? c : Vector3(c / double(vertices.size()));
}

std::size_t LabeledMesh::part_vertex_count(PartLabel part) const {
  std::size_t n = 0;
  for (PartLabel p : part_of) n += (p == part);
  return n;
}

LabeledMesh LabeledMesh::transformed(const Pose3d& pose) const {
  LabeledMesh out;
  out.vertices.reserve(vertices.size());
  for (const auto& v : vertices) out.vertices.push_back(pose * v);
  out.faces = faces;
  out.part_of = part_of;
  for (int k = 0; k < kKeypointCount; ++k) out.keypoints[k] = pose * keypoints[k];
  return out;
}

LabeledMesh make_humanoid(const JointAngles& angles, double height) {
  for (double a : angles.as_array()) check_angle(a);
  if (!(height >= 1.4 && height <= 2.0)) {
    throw std::invalid_argument("make_humanoid: standing height must lie in [1.4, 2.0] m");
  }
  const double H = height;
  using P = PartLabel;
  LabeledMesh mesh;

  const Vector3 head_a(0, 0, 0.925 * H), head_b(0, 0, 0.945 * H);
  const double head_r = 0.062 * H;
  append_capsule({P::head, head_a, head_b, head_r, head_r, head_r, 1}, mesh);
  // Torso: wider than deep; the frame's first axis is lateral for a vertical axis.
  append_capsule({P::torso, Vector3(0, 0, 0.56 * H), Vector3(0, 0, 0.78 * H), 0.11 * H, 0.07 * H, 0.07 * H, 7}, mesh);

  struct ArmSide {
    double sign;
    double shoulder, elbow;
    P upper, lower, hand;
    Keypoint kp_shoulder, kp_elbow, kp_wrist;
  };
  const ArmSide arms[2] = {
      {1.0, angles.left_shoulder, angles.left_elbow, P::left_upper_arm, P::left_lower_arm, P::left_hand,
       Keypoint::left_shoulder, Keypoint::left_elbow, Keypoint::left_wrist},
      {-1.0, angles.right_shoulder, angles.right_elbow, P::right_upper_arm, P::right_lower_arm, P::right_hand,
       Keypoint::right_shoulder, Keypoint::right_elbow, Keypoint::right_wrist},
  };
  std::array<Vector3, kKeypointCount> kp{};
  for (const auto& arm : arms) {
    const Vector3 shoulder(0, arm.sign * 0.14 * H, 0.80 * H);
    const Vector3 upper_dir(0, arm.sign * std::cos(arm.shoulder), std::sin(arm.shoulder));
    const Vector3 elbow = shoulder + 0.17 * H * upper_dir;
    const Vector3 fore_dir = (std::cos(arm.elbow) * upper_dir + std::sin(arm.elbow) * Vector3::UnitX()).normalized();
    const Vector3 wrist = elbow + 0.15 * H * fore_dir;
    const Vector3 hand_end = wrist + 0.07 * H * fore_dir;
    append_capsule({arm.upper, shoulder, elbow, 0.028 * H, 0.028 * H, 0.028 * H, 3}, mesh);
    append_capsule({arm.lower, elbow, wrist, 0.023 * H, 0.023 * H, 0.023 * H, 3}, mesh);
    append_capsule({arm.hand, wrist + 0.02 * H * fore_dir, hand_end, 0.022 * H, 0.022 * H, 0.022 * H, 1}, mesh);
    kp[std::size_t(arm.kp_shoulder)] = shoulder;
    kp[std::size_t(arm.kp_elbow)] = elbow;
    kp[std::size_t(arm.kp_wrist)] = wrist;
  }

  struct LegSide {
    double sign;
    double hip, knee;
    P upper, lower, foot;
    Keypoint kp_hip, kp_knee, kp_ankle;
  };
  const LegSide legs[2] = {
      {1.0, angles.left_hip, angles.left_knee, P::left_upper_leg, P::left_lower_leg, P::left_foot,
       Keypoint::left_hip, Keypoint::left_knee, Keypoint::left_ankle},
      {-1.0, angles.right_hip, angles.right_knee, P::right_upper_leg, P::right_lower_leg, P::right_foot,
       Keypoint::right_hip, Keypoint::right_knee, Keypoint::right_ankle},
  };
  for (const auto& leg : legs) {
    const Vector3 hip(0, leg.sign * 0.06 * H, 0.50 * H);
    const Vector3 thigh_dir(std::sin(leg.hip), 0, -std::cos(leg.hip));
    const Vector3 knee = hip + 0.22 * H * thigh_dir;
    const double shin_angle = leg.hip - leg.knee;
    const Vector3 shin_dir(std::sin(shin_angle), 0, -std::cos(shin_angle));
    const Vector3 ankle = knee + 0.22 * H * shin_dir;
    const Vector3 foot_dir(std::cos(shin_angle), 0, std::sin(shin_angle));
    const Vector3 heel = ankle + 0.035 * H * shin_dir - 0.02 * H * foot_dir;
    append_capsule({leg.upper, hip, knee, 0.045 * H, 0.045 * H, 0.045 * H, 3}, mesh);
    append_capsule({leg.lower, knee, ankle, 0.035 * H, 0.035 * H, 0.035 * H, 3}, mesh);
    append_capsule({leg.foot, heel, heel + 0.11 * H * foot_dir, 0.025 * H, 0.025 * H, 0.025 * H, 1}, mesh);
    kp[std::size_t(leg.kp_hip)] = hip;
    kp[std::size_t(leg.kp_knee)] = knee;
    kp[std::size_t(leg.kp_ankle)] = ankle;
  }

  const Vector3 head_c = 0.5 * (head_a + head_b);
  kp[std::size_t(Keypoint::nose)] = head_c + head_r * Vector3(1, 0, -0.15).normalized();
  kp[std::size_t(Keypoint::left_eye)] = head_c + head_r * Vector3(0.9, 0.35, 0.15).normalized();
  kp[std::size_t(Keypoint::right_eye)] = head_c + head_r * Vector3(0.9, -0.35, 0.15).normalized();
  kp[std::size_t(Keypoint::left_ear)] = head_c + head_r * Vector3(0, 1, 0);
  kp[std::size_t(Keypoint::right_ear)] = head_c + head_r * Vector3(0, -1, 0);
  mesh.keypoints = kp;

  double min_z = mesh.vertices.front().z();
  for (const auto& v : mesh.vertices) min_z = std::min(min_z, v.z());
  return mesh.transformed(Pose3d::from_translation(Vector3(0, 0, -min_z)));
}

std::vector<Vector3> vertex_normals(const LabeledMesh& mesh) {
  std::vector<Vector3> normals(mesh.vertices.size(), Vector3::Zero());
  for (const auto& f : mesh.faces) {
    const Vector3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (auto i : f) normals[i] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
  return normals;
}

double signed_volume(const LabeledMesh& mesh, PartLabel part) {
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    if (mesh.part_of[f[0]] != part) continue;
    vol += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]])) / 6.0;
  }
  return vol;
}

}  // namespace oanbv
