#include <doctest.h>

#include "oanbv/kdtree.hpp"
#include "oanbv/normals.hpp"
#include "oanbv/point_cloud.hpp"
#include "oanbv/random.hpp"
#include "oanbv/robot.hpp"

#include <cmath>
#include <numbers>

using namespace oanbv;

namespace {

Pose3d random_pose(Rng& rng) {
  const Vector3 axis = Vector3(rng.normal(), rng.normal(), rng.normal()).normalized();
  const Matrix3 R = Eigen::AngleAxisd(rng.uniform(-3.0, 3.0), axis).toRotationMatrix();
  return Pose3d(R, Vector3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)));
}

}  // namespace

TEST_CASE("pose group laws") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose3d a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    CHECK(pose_distance((a * b) * c, a * (b * c)) < 1e-9);
    CHECK(pose_distance(a * a.inverse(), Pose3d::identity()) < 1e-9);
    CHECK(pose_distance(a.inverse() * a, Pose3d::identity()) < 1e-9);
    CHECK(pose_distance(a * Pose3d::identity(), a) < 1e-12);
    CHECK(pose_distance((a * b).inverse(), b.inverse() * a.inverse()) < 1e-9);
    const Vector3 p(rng.normal(), rng.normal(), rng.normal());
    CHECK(((a * b) * p - a * (b * p)).norm() < 1e-9);
    CHECK(orthonormality_error((a * b * c).rotation()) < 1e-9);
  }
}

TEST_CASE("pose rejects non-rotations and repairs drift") {
  Matrix3 scaled = 1.01 * Matrix3::Identity();
  CHECK_THROWS_AS(Pose3d(scaled, Vector3::Zero()), std::invalid_argument);
  Matrix3 reflect = Matrix3::Identity();
  reflect(2, 2) = -1;
  CHECK_THROWS_AS(Pose3d(reflect, Vector3::Zero()), std::invalid_argument);

  Matrix3 near = rot_z(0.3);
  near(0, 1) += 1e-8;
  const Pose3d p(near, Vector3::Zero());
  CHECK(orthonormality_error(p.rotation()) < 1e-12);
}

TEST_CASE("pose works in single precision") {
  const Pose<float> p(rot_x(0.5f), Vec3<float>(1, 2, 3));
  const Vec3<float> q = p.inverse() * (p * Vec3<float>(0.1f, 0.2f, 0.3f));
  CHECK((q - Vec3<float>(0.1f, 0.2f, 0.3f)).norm() < 1e-5f);
  CHECK(pose_distance(p.cast<double>().cast<float>(), p) < 1e-6f);
}

TEST_CASE("projection round trip") {
  const CameraIntrinsics K;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(0, K.width), v = rng.uniform(0, K.height), z = rng.uniform(0.1, 20);
    const Vector3 p = unproject(K, u, v, z);
    const auto px = project(K, p);
    REQUIRE(px);
    CHECK(std::abs(px->u - u) < 1e-6);
    CHECK(std::abs(px->v - v) < 1e-6);
    CHECK(std::abs(px->depth - z) < 1e-6);
    CHECK((pixel_ray(K, u, v) * p.norm() - p).norm() < 1e-6);
  }
  CHECK_FALSE(project(K, Vector3(0, 0, 0)));
  CHECK_FALSE(project(K, Vector3(0, 0, -1)));
}

TEST_CASE("pixel convention floors continuous coordinates") {
  const CameraIntrinsics K;
  CHECK(pixel_index(0.999) == 0);
  CHECK(pixel_index(-0.001) == -1);
  CHECK(in_frame(K, 0.0, 0.0));
  CHECK_FALSE(in_frame(K, 640.0, 10.0));
  CHECK(in_frame(K, 639.99, 479.99));
}

TEST_CASE("optical frame looks along body x") {
  const Pose3d body = Pose3d::identity();
  const Pose3d optical = optical_pose(body);
  CHECK((optical.transform_direction(Vector3::UnitZ()) - Vector3::UnitX()).norm() < 1e-12);
  CHECK((optical.transform_direction(Vector3::UnitX()) - (-Vector3::UnitY())).norm() < 1e-12);
  CHECK((optical.transform_direction(Vector3::UnitY()) - (-Vector3::UnitZ())).norm() < 1e-12);
}

TEST_CASE("camera_from_base pitches down and enforces the working range") {
  const RobotModel robot;
  const Pose3d base = base_pose(Vector3(1, 2, 0.3), 0.0);
  const Pose3d level = camera_from_base(base, 0.0, robot.mount);
  CHECK((level.translation() - Vector3(1.25, 2.0, 0.4)).norm() < 1e-12);
  const Pose3d down = camera_from_base(base, 0.5, robot.mount);
  CHECK(down.rotation().col(0).z() < 0.0);
  CHECK_THROWS_AS(camera_from_base(base, 0.8, robot.mount), std::invalid_argument);
  CHECK(std::abs(base_yaw(base_pose(Vector3::Zero(), 1.2)) - 1.2) < 1e-12);
}

TEST_CASE("kd-tree matches a linear scan") {
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(mix_seed(inst));
    std::vector<Vector3> pts(1 + rng.index(400));
    for (auto& p : pts) {
      // Coarse lattice values force exact distance ties.
      p = Vector3(rng.uniform_int(-5, 5), rng.uniform_int(-5, 5), rng.uniform_int(-5, 5)) * 0.5;
    }
    const KdTree tree(pts);
    for (int q = 0; q < 20; ++q) {
      const Vector3 query(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
      const Neighbor a = tree.nearest(query);
      const Neighbor b = brute_force_nearest(pts, query);
      CHECK(a.index == b.index);
      CHECK(a.distance == b.distance);
    }
  }
}

TEST_CASE("k nearest is sorted and complete") {
  Rng rng(5);
  std::vector<Vector3> pts(300);
  for (auto& p : pts) p = Vector3(rng.normal(), rng.normal(), rng.normal());
  const KdTree tree(pts);
  const Vector3 q(0.1, -0.2, 0.3);
  const auto nn = tree.k_nearest(q, 12);
  REQUIRE(nn.size() == 12);
  std::vector<double> all;
  for (const auto& p : pts) all.push_back((p - q).norm());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < nn.size(); ++i) CHECK(nn[i].distance == doctest::Approx(all[i]).epsilon(1e-12));
  CHECK(tree.k_nearest(q, 1000).size() == pts.size());
  CHECK_THROWS_AS(KdTree().nearest(q), std::invalid_argument);
}

TEST_CASE("normals of a plane face the sensor") {
  PointCloud cloud;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) cloud.points.emplace_back(0.05 * i, 0.05 * j, 1.0);
  const PointCloud out = estimate_normals(cloud, 8, Vector3::Zero());
  REQUIRE(out.normals.size() == cloud.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.normal_valid[i] == 1);
    CHECK(out.normals[i].z() == doctest::Approx(-1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(estimate_normals(cloud, 2, Vector3::Zero()), std::invalid_argument);
}

TEST_CASE("collinear neighborhoods get invalid normals") {
  PointCloud line;
  for (int i = 0; i < 10; ++i) line.points.emplace_back(0.1 * i, 0.0, 2.0);
  const PointCloud out = estimate_normals(line, 4, Vector3::Zero());
  for (auto v : out.normal_valid) CHECK(v == 0);
}

TEST_CASE("depth rendering splats and keeps the nearest") {
  const CameraIntrinsics K;
  std::vector<Vector3> pts = {Vector3(0, 0, 2), Vector3(0, 0, 1), Vector3(0, 0, -1)};
  const DepthImage d = render_depth(pts, Pose3d::identity(), K, 1);
  CHECK(d.count_filled() == 9);
  CHECK(d.at(320, 240) == 1.0);
  CHECK(d.at(321, 241) == 1.0);
  CHECK(d.empty_at(322, 240));
  CHECK(render_depth(pts, Pose3d::identity(), K, 0).count_filled() == 1);
}

TEST_CASE("point cloud channels and transforms") {
  PointCloud c;
  c.points = {Vector3(1, 0, 0), Vector3(0, 1, 0)};
  c.labels = {PointLabel::target, PointLabel::background};
  c.normals = {Vector3::UnitX(), Vector3::UnitY()};
  c.validate();
  const PointCloud t = c.transformed(Pose3d(rot_z(std::numbers::pi / 2), Vector3(0, 0, 1)));
  CHECK((t.points[0] - Vector3(0, 1, 1)).norm() < 1e-12);
  CHECK((t.normals[0] - Vector3(0, 1, 0)).norm() < 1e-12);
  CHECK(t.count_label(PointLabel::target) == 1);
  c.labels.pop_back();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
