#pragma once

#include "oanbv/pose.hpp"

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace oanbv {

enum class PartLabel : std::uint8_t {
  head,
  torso,
  left_upper_arm,
  left_lower_arm,
  right_upper_arm,
  right_lower_arm,
  left_upper_leg,
  left_lower_leg,
  right_upper_leg,
  right_lower_leg,
  left_hand,
  right_hand,
  left_foot,
  right_foot,
};
inline constexpr int kPartCount = 14;

std::string_view part_name(PartLabel part);

/// Small value-type set of body parts.
class PartSet {
 public:
  constexpr PartSet() = default;
  static constexpr PartSet all() { return PartSet((1u << kPartCount) - 1u); }
  static constexpr PartSet of(std::initializer_list<PartLabel> parts) {
    PartSet s;
    for (PartLabel p : parts) s.insert(p);
    return s;
  }

  constexpr bool contains(PartLabel p) const { return (bits_ >> unsigned(p)) & 1u; }
  constexpr void insert(PartLabel p) { bits_ |= std::uint16_t(1u << unsigned(p)); }
  constexpr void erase(PartLabel p) { bits_ &= std::uint16_t(~(1u << unsigned(p))); }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return __builtin_popcount(bits_); }
  constexpr std::uint16_t bits() const { return bits_; }
  constexpr bool operator==(const PartSet&) const = default;

 private:
  constexpr explicit PartSet(unsigned bits) : bits_(static_cast<std::uint16_t>(bits)) {}
  std::uint16_t bits_ = 0;
};

/// COCO-17 skeleton order.
enum class Keypoint : std::uint8_t {
  nose,
  left_eye,
  right_eye,
  left_ear,
  right_ear,
  left_shoulder,
  right_shoulder,
  left_elbow,
  right_elbow,
  left_wrist,
  right_wrist,
  left_hip,
  right_hip,
  left_knee,
  right_knee,
  left_ankle,
  right_ankle,
};
inline constexpr int kKeypointCount = 17;

std::string_view keypoint_name(Keypoint kp);

/// Body parts a keypoint sits inside of; rays may pass through these without
/// counting as self-occlusion.
PartSet keypoint_local_parts(Keypoint kp);

/// Limb angles in radians, each limited to [-pi/2, pi/2]. All zero is a T-pose.
/// Shoulder: elevation of the upper arm above horizontal. Elbow: forward bend.
/// Hip: forward flexion of the thigh. Knee: backward bend of the shin.
struct JointAngles {
  double left_shoulder = 0.0;
  double right_shoulder = 0.0;
  double left_elbow = 0.0;
  double right_elbow = 0.0;
  double left_hip = 0.0;
  double right_hip = 0.0;
  double left_knee = 0.0;
  double right_knee = 0.0;

  std::array<double, 8> as_array() const;
  static JointAngles from_array(const std::array<double, 8>& a);
};

/// Triangle mesh with a per-vertex part label and a 17-joint skeleton.
/// Every instance built from the same template shares vertex order.
struct LabeledMesh {
  std::vector<Vector3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<PartLabel> part_of;
  std::array<Vector3, kKeypointCount> keypoints{};

  std::size_t vertex_count() const { return vertices.size(); }
  Vector3 centroid() const;
  std::size_t part_vertex_count(PartLabel part) const;
  LabeledMesh transformed(const Pose3d& pose) const;
  const Vector3& keypoint(Keypoint kp) const { return keypoints[std::size_t(kp)]; }
};

/// Capsule-based articulated humanoid in its body frame: x forward, y left,
/// z up, lowest vertex at z = 0, centered between the feet.
/// Throws std::invalid_argument for angles beyond +-90 degrees or a standing
/// height outside [1.4, 2.0] m.
LabeledMesh make_humanoid(const JointAngles& angles, double height);

/// Area-weighted unit vertex normals (outward for the capsule template).
std::vector<Vector3> vertex_normals(const LabeledMesh& mesh);

/// Sum of signed tetrahedron volumes; positive when faces wind outward.
double signed_volume(const LabeledMesh& mesh, PartLabel part);

}  // namespace oanbv
