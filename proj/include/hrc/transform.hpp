#pragma once

#include <cmath>

#include <Eigen/Geometry>

#include "hrc/types.hpp"

namespace hrc {

/// Rigid-body pose in SE(3). Maps points from the child frame into the parent
/// frame: p_parent = R * p_child + t. Composition follows the usual
/// T_a^c = T_a^b * T_b^c reading.
class Transform {
 public:
  Transform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Transform(const Mat3& rotation, const Vec3& translation) : rotation_(rotation), translation_(translation) {}

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Transform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
  static Transform from_axis_angle(const Vec3& axis, double angle)
  {
    return from_rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
  }
  static Transform rot_x(double a) { return from_axis_angle(Vec3::UnitX(), a); }
  static Transform rot_y(double a) { return from_axis_angle(Vec3::UnitY(), a); }
  static Transform rot_z(double a) { return from_axis_angle(Vec3::UnitZ(), a); }

  // Roll-pitch-yaw about fixed x, y, z axes: R = Rz(yaw) Ry(pitch) Rx(roll).
  static Transform from_rpy(const Vec3& t, double roll, double pitch, double yaw)
  {
    return {(rot_z(yaw) * rot_y(pitch) * rot_x(roll)).rotation(), t};
  }

  // Camera-style pose at `eye` looking at `target`: z forward, x right, y down.
  static Transform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ())
  {
    const Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(up);
    if (x.norm() < 1e-9) {
      x = z.cross(Vec3::UnitX());
    }
    x.normalize();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return {r, eye};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Transform operator*(const Transform& rhs) const
  {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
  }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

  Transform inverse() const
  {
    const Mat3 rt = rotation_.transpose();
    return {rt, -rt * translation_};
  }

  Mat4 matrix() const
  {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  static Transform from_matrix(const Mat4& m) { return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()}; }

  bool is_valid(double tol = 1e-9) const
  {
    if (!rotation_.allFinite() || !translation_.allFinite()) {
      return false;
    }
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
  }

  bool is_approx(const Transform& other, double tol = 1e-9) const
  {
    return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
           (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

}  // namespace hrc
