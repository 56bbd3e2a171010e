#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oanbv {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

using Vector2 = Vec2<double>;
using Vector3 = Vec3<double>;
using Matrix3 = Mat3<double>;
using Matrix4 = Mat4<double>;

/// Largest absolute entry of R^T R - I.
template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& R) {
  using S = typename Derived::Scalar;
  return (R.transpose() * R - Mat3<S>::Identity()).cwiseAbs().maxCoeff();
}

/// Closest rotation in the Frobenius sense (polar decomposition via SVD).
template <typename Derived>
Mat3<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& R) {
  using S = typename Derived::Scalar;
  Eigen::JacobiSVD<Mat3<S>> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<S> out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < S(0)) {
    Mat3<S> U = svd.matrixU();
    U.col(2) *= S(-1);
    out = U * svd.matrixV().transpose();
  }
  return out;
}

/// Rigid transform in SE(3). Maps points from its child frame into its parent
/// frame: p_parent = rotation * p_child + translation.
template <typename Scalar>
class Pose {
 public:
  using Matrix3Type = Mat3<Scalar>;
  using Vector3Type = Vec3<Scalar>;

  /// Drift beyond which compositions are projected back onto SO(3).
  static constexpr double kDriftTolerance = 1e-9;
  /// Inputs further than this from SO(3) are rejected outright.
  static constexpr double kRejectTolerance = 1e-6;

  Pose() : rotation_(Matrix3Type::Identity()), translation_(Vector3Type::Zero()) {}

  Pose(const Matrix3Type& rotation, const Vector3Type& translation)
      : rotation_(rotation), translation_(translation) {
    const Scalar err = orthonormality_error(rotation_);
    if (!(err <= Scalar(kRejectTolerance)) || rotation_.determinant() < Scalar(0)) {
      throw std::invalid_argument("Pose: rotation is not a proper orthonormal matrix");
    }
    if (err > Scalar(kDriftTolerance)) rotation_ = orthonormalize(rotation_);
  }

  static Pose identity() { return Pose(); }

  static Pose from_translation(const Vector3Type& t) { return Pose(Matrix3Type::Identity(), t); }

  static Pose from_matrix(const Mat4<Scalar>& m) {
    return Pose(m.template topLeftCorner<3, 3>(), m.template topRightCorner<3, 1>());
  }

  const Matrix3Type& rotation() const { return rotation_; }
  const Vector3Type& translation() const { return translation_; }

  Mat4<Scalar> matrix() const {
    Mat4<Scalar> m = Mat4<Scalar>::Identity();
    m.template topLeftCorner<3, 3>() = rotation_;
    m.template topRightCorner<3, 1>() = translation_;
    return m;
  }

  Pose inverse() const {
    Pose out;
    out.rotation_ = rotation_.transpose();
    out.translation_ = -(out.rotation_ * translation_);
    return out;
  }

  /// Applies `rhs` first, then `*this`.
  Pose operator*(const Pose& rhs) const {
    Pose out;
    out.rotation_ = rotation_ * rhs.rotation_;
    out.translation_ = rotation_ * rhs.translation_ + translation_;
    if (orthonormality_error(out.rotation_) > Scalar(kDriftTolerance)) {
      out.rotation_ = orthonormalize(out.rotation_);
    }
    return out;
  }

  Vector3Type operator*(const Vector3Type& p) const { return rotation_ * p + translation_; }

  Vector3Type transform_direction(const Vector3Type& d) const { return rotation_ * d; }

  template <typename NewScalar>
  Pose<NewScalar> cast() const {
    return Pose<NewScalar>(rotation_.template cast<NewScalar>(),
                           translation_.template cast<NewScalar>());
  }

 private:
  Matrix3Type rotation_;
  Vector3Type translation_;
};

using Pose3d = Pose<double>;

template <typename Scalar>
Pose<Scalar> compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return a * b;
}

template <typename Scalar>
Pose<Scalar> invert(const Pose<Scalar>& p) {
  return p.inverse();
}

template <typename Scalar>
Mat3<Scalar> rot_x(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitX()).toRotationMatrix();
}

template <typename Scalar>
Mat3<Scalar> rot_y(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitY()).toRotationMatrix();
}

template <typename Scalar>
Mat3<Scalar> rot_z(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitZ()).toRotationMatrix();
}

/// Largest entry-wise difference between two poses' 4x4 matrices.
template <typename Scalar>
Scalar pose_distance(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Rotation angle of R in radians.
template <typename Derived>
typename Derived::Scalar rotation_angle(const Eigen::MatrixBase<Derived>& R) {
  using S = typename Derived::Scalar;
  const S c = std::clamp((R.trace() - S(1)) / S(2), S(-1), S(1));
  return std::acos(c);
}

}  // namespace oanbv
