#include <doctest.h>

#include "oanbv/alignment.hpp"
#include "oanbv/random.hpp"

#include <algorithm>
#include <cmath>

using namespace oanbv;

namespace {

// Humanoid surface as an ICP target with exact normals.
PointCloud humanoid_cloud() {
  const LabeledMesh m = make_humanoid({}, 1.7);
  PointCloud c;
  c.points = m.vertices;
  c.normals = vertex_normals(m);
  c.normal_valid.assign(c.size(), 1);
  return c;
}

Pose3d small_motion(Rng& rng, double max_angle, double max_shift) {
  const Vector3 axis = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
  const Vector3 dir = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return Pose3d(Eigen::AngleAxisd(rng.uniform(0, max_angle), axis).toRotationMatrix(),
                rng.uniform(0, max_shift) * dir);
}

}  // namespace

TEST_CASE("point-to-plane ICP recovers a small rigid motion") {
  const PointCloud target = humanoid_cloud();
  IcpConfig cfg;
  cfg.max_corr = 1.0;
  cfg.max_iter = 100;
  cfg.tol = 1e-12;
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Pose3d truth = small_motion(rng, 0.15, 0.1);
    const Pose3d inv = truth.inverse();
    std::vector<Vector3> source, normals;
    for (std::size_t i = 0; i < target.size(); ++i) {
      source.push_back(inv * target.points[i]);
      normals.push_back(inv.transform_direction(target.normals[i]));
    }
    const IcpResult r = point_to_plane_icp(source, normals, target, Pose3d::identity(), cfg);
    CHECK(rotation_angle(Matrix3(r.transform.rotation().transpose() * truth.rotation())) < 1e-3);
    CHECK((r.transform.translation() - truth.translation()).norm() < 1e-3);
    CHECK(r.residual_history.back() <= r.residual_history.front());
  }
}

TEST_CASE("ICP input checks") {
  const PointCloud target = humanoid_cloud();
  std::vector<Vector3> none;
  CHECK_THROWS_AS(point_to_plane_icp(none, none, target, Pose3d::identity()), std::invalid_argument);
  PointCloud bare;
  bare.points = target.points;
  const std::vector<Vector3> src(target.points.begin(), target.points.begin() + 20);
  CHECK_THROWS_AS(point_to_plane_icp(src, none, bare, Pose3d::identity()), std::invalid_argument);

  // Far outside the correspondence radius: too few pairs.
  std::vector<Vector3> far;
  for (const auto& p : target.points) far.push_back(p + Vector3(10, 0, 0));
  CHECK_THROWS_AS(point_to_plane_icp(far, none, target, Pose3d::identity()), DegenerateRegistration);
}

TEST_CASE("lift_mask partitions the cloud") {
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(mix_seed(inst, 4));
    CameraIntrinsics K;
    K.width = 40 + int(rng.index(40));
    K.height = 30 + int(rng.index(30));
    K.cx = K.width / 2.0;
    K.cy = K.height / 2.0;
    K.fx = K.fy = 30.0;
    std::vector<std::uint8_t> mask(std::size_t(K.pixel_count()));
    for (auto& m : mask) m = rng.bernoulli(0.3) ? 1 : 0;
    PointCloud cloud;
    for (int i = 0; i < 200; ++i) {
      cloud.points.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 4));
      cloud.labels.push_back(rng.bernoulli(0.5) ? PointLabel::target : PointLabel::background);
    }
    const LiftedMask lm = lift_mask(cloud, K, mask);
    REQUIRE(lm.p_tgt.size() + lm.p_bg.size() == cloud.size());
    // Every input point lands in exactly one side, in order.
    std::size_t t = 0, b = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vector3& p = cloud.points[i];
      const auto pr = project(K, p);
      const bool on_mask = pr && in_frame(K, pr->u, pr->v) &&
                           mask[std::size_t(pixel_index(pr->v)) * K.width + pixel_index(pr->u)];
      if (on_mask) {
        REQUIRE(t < lm.p_tgt.size());
        CHECK(lm.p_tgt.points[t] == p);
        CHECK(lm.p_tgt.labels[t++] == cloud.labels[i]);
      } else {
        REQUIRE(b < lm.p_bg.size());
        CHECK(lm.p_bg.points[b++] == p);
      }
    }
    CHECK(t == lm.p_tgt.size());
    CHECK(b == lm.p_bg.size());
  }
  CHECK_THROWS_AS(lift_mask(PointCloud{}, CameraIntrinsics{}, std::vector<std::uint8_t>(3)), std::invalid_argument);
}

TEST_CASE("perturbation is rigid, seeded, and mostly along the viewing ray") {
  const LabeledMesh gt = make_humanoid({}, 1.7).transformed(Pose3d::from_translation(Vector3(4, 0, 0)));
  const Pose3d cam = optical_pose(Pose3d::from_translation(Vector3(0, 0, 0.9)));
  const LabeledMesh a = perturb_initial_mesh(gt, cam, 8);
  const LabeledMesh b = perturb_initial_mesh(gt, cam, 8);
  CHECK(a.vertices == b.vertices);
  CHECK(std::abs((a.vertices[0] - a.vertices[100]).norm() - (gt.vertices[0] - gt.vertices[100]).norm()) < 1e-9);
  CHECK(mpvpe(perturb_initial_mesh(gt, cam, 8, {0, 0, 0}), gt) == 0.0);

  PerturbConfig depth_only{0.4, 0.0, 0.0};
  double along = 0, across = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Vector3 shift = perturb_initial_mesh(gt, cam, s, depth_only).centroid() - gt.centroid();
    const Vector3 ray = (gt.centroid() - cam.translation()).normalized();
    along += std::abs(shift.dot(ray));
    across += (shift - shift.dot(ray) * ray).norm();
  }
  CHECK(along > 5.0);
  CHECK(across < 1e-9);
  CHECK_THROWS_AS(perturb_initial_mesh(gt, cam, 1, {-1, 0, 0}), std::invalid_argument);
}

TEST_CASE("default perturbation stays near the viewing ray over 1000 seeds") {
  const LabeledMesh gt = make_humanoid({}, 1.7).transformed(Pose3d::from_translation(Vector3(4, 0, 0)));
  const Pose3d cam = optical_pose(Pose3d::from_translation(Vector3(0, 0, 0.9)));
  const Vector3 ray = (gt.centroid() - cam.translation()).normalized();
  std::vector<double> angles;
  double sq_along = 0, sq_across = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Vector3 d = perturb_initial_mesh(gt, cam, s).centroid() - gt.centroid();
    const double along = d.dot(ray);
    const double across = (d - along * ray).norm();
    sq_along += along * along;
    sq_across += across * across;
    // Angle to the ray line: depth error has either sign.
    angles.push_back(std::atan2(across, std::abs(along)));
  }
  std::nth_element(angles.begin(), angles.begin() + 500, angles.end());
  const double deg = 180.0 / M_PI;
  CHECK(angles[500] * deg < 15.0);
  CHECK(std::atan(std::sqrt(sq_across / sq_along)) * deg < 15.0);
}

TEST_CASE("mpvpe and part submesh") {
  const LabeledMesh m = make_humanoid({}, 1.7);
  CHECK(mpvpe(m, m) == 0.0);
  CHECK(mpvpe(m, m.transformed(Pose3d::from_translation(Vector3(0.3, 0, 0.4)))) == doctest::Approx(0.5));
  LabeledMesh fewer = m;
  fewer.vertices.pop_back();
  CHECK_THROWS_AS(mpvpe(m, fewer), std::invalid_argument);

  const auto idx = extract_part_submesh(m, PartSet::of({PartLabel::head, PartLabel::left_foot}));
  CHECK(idx.size() == m.part_vertex_count(PartLabel::head) + m.part_vertex_count(PartLabel::left_foot));
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  for (auto i : idx) CHECK((m.part_of[i] == PartLabel::head || m.part_of[i] == PartLabel::left_foot));
}

TEST_CASE("visible parts and part alignment on a generated scene") {
  const SceneGenConfig gen;
  const Scene scene = generate_scene(ScenarioFamily::indoor, 12, gen);
  const RayCaster rc(scene);
  const Pose3d cam = optical_pose(scene.spawn_camera(gen.robot));
  const PartSet parts = visible_parts(rc, cam, gen.K);
  CHECK_FALSE(parts.empty());
  CHECK(parts.size() < kPartCount);

  const Observation obs = render_observation(rc, cam, gen.K, 2);
  const Pose3d to_cam = cam.inverse();
  const LabeledMesh gt_cam = scene.target.transformed(to_cam);
  const LabeledMesh init = perturb_initial_mesh(scene.target, cam, 3).transformed(to_cam);
  AlignConfig cfg;
  const AlignmentResult r = align_target(obs, init, parts, cfg);
  CHECK_FALSE(r.skipped);
  CHECK(r.p_tgt.size() + r.p_bg.size() == obs.cloud.size());
  CHECK(mpvpe(r.aligned, gt_cam) < mpvpe(init, gt_cam));
  CHECK(r.residual_history.back() <= r.residual_history.front());

  // Nothing to align against.
  Observation empty = obs;
  std::fill(empty.gt_mask.begin(), empty.gt_mask.end(), 0);
  const AlignmentResult s = align_target(empty, init, parts, cfg);
  CHECK(s.skipped);
  CHECK(s.aligned.vertices == init.vertices);
}
