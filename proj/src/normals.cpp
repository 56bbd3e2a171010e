#include "oanbv/normals.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace oanbv {

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k, const Vector3& sensor_origin) {
  if (k < 3) throw std::invalid_argument("estimate_normals: k must be at least 3");
  if (cloud.size() < k) throw std::invalid_argument("estimate_normals: cloud has fewer than k points");

  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vector3::Zero());
  out.normal_valid.assign(cloud.size(), 0);

  const KdTree tree(cloud.points);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto neighbors = tree.k_nearest(cloud.points[i], k);
    Vector3 mean = Vector3::Zero();
    for (const auto& n : neighbors) mean += cloud.points[n.index];
    mean /= static_cast<double>(neighbors.size());
    Matrix3 cov = Matrix3::Zero();
    for (const auto& n : neighbors) {
      const Vector3 d = cloud.points[n.index] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
    const Vector3 ev = solver.eigenvalues();  // ascending
    // rank < 2: the middle eigenvalue vanishes relative to the largest
    if (!(ev[2] > 0.0) || ev[1] <= 1e-10 * ev[2]) continue;
    Vector3 normal = solver.eigenvectors().col(0).normalized();
    if (normal.dot(sensor_origin - cloud.points[i]) < 0.0) normal = -normal;
    out.normals[i] = normal;
    out.normal_valid[i] = 1;
  }
  return out;
}

}  // namespace oanbv
