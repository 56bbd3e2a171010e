#include "oanbv/icp.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace oanbv {

namespace {

struct Usable {
  std::vector<Vector3> points;
  std::vector<Vector3> normals;
};

Usable usable_target(const PointCloud& target) {
  if (!target.has_normals()) throw std::invalid_argument("point_to_plane_icp: target needs normals");
  Usable u;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!target.normal_valid.empty() && !target.normal_valid[i]) continue;
    u.points.push_back(target.points[i]);
    u.normals.push_back(target.normals[i]);
  }
  return u;
}

}  // namespace

IcpResult point_to_plane_icp(std::span<const Vector3> source, std::span<const Vector3> source_normals,
                             const PointCloud& target, const Pose3d& init, const IcpConfig& cfg) {
  if (source.empty()) throw std::invalid_argument("point_to_plane_icp: empty source");
  if (!source_normals.empty() && source_normals.size() != source.size()) {
    throw std::invalid_argument("point_to_plane_icp: source normal count mismatch");
  }
  const Usable tgt = usable_target(target);
  if (tgt.points.size() < 10) throw std::invalid_argument("point_to_plane_icp: fewer than 10 usable target points");
  const KdTree tree(tgt.points);
  const double max_d = cfg.max_corr;

  IcpResult result;
  Pose3d T = init;
  Pose3d best_T = init;
  double best_res = std::numeric_limits<double>::infinity();
  double prev_res = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    Eigen::Matrix<double, 6, 6> AtA = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> Atb = Eigen::Matrix<double, 6, 1>::Zero();
    double sq = 0.0;
    long n_corr = 0;
    const Matrix3 R = T.rotation();
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Vector3 p = T * source[i];
      const Neighbor nb = tree.nearest(p);
      if (nb.distance > max_d) continue;
      const Vector3& n = tgt.normals[nb.index];
      if (!source_normals.empty() && (R * source_normals[i]).dot(n) < cfg.min_normal_cos) continue;
      const double r = (p - tgt.points[nb.index]).dot(n);
      Eigen::Matrix<double, 6, 1> a;
      a.head<3>() = p.cross(n);
      a.tail<3>() = n;
      AtA.noalias() += a * a.transpose();
      Atb.noalias() -= a * r;
      sq += r * r;
      ++n_corr;
    }
    if (n_corr < 6) {
      throw DegenerateRegistration("point_to_plane_icp: only " + std::to_string(n_corr) + " correspondences");
    }
    const double res = std::sqrt(sq / double(n_corr));
    result.residual_history.push_back(res);
    if (res < best_res) {
      best_res = res;
      best_T = T;
    }
    if (iter == cfg.max_iter) break;
    if (std::abs(prev_res - res) < cfg.tol) {
      result.converged = true;
      break;
    }
    prev_res = res;

    const Eigen::Matrix<double, 6, 1> x = AtA.completeOrthogonalDecomposition().solve(Atb);
    const Vector3 w = x.head<3>();
    const double angle = w.norm();
    Matrix3 dR = Matrix3::Identity();
    if (angle > 0.0) dR = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
    T = Pose3d(orthonormalize(dR * T.rotation()), dR * T.translation() + x.tail<3>());
    ++result.iterations;
  }

  result.transform = best_T;
  if (result.residual_history.back() != best_res) result.residual_history.push_back(best_res);
  return result;
}

}  // namespace oanbv
