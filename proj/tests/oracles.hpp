#pragma once

#include <cmath>

#include <Eigen/Geometry>

#include "hrc/kinematics.hpp"

namespace hrc::testing {

// Reference DH chain built from elementary homogeneous matrices, kept apart
// from the closed-form row transform used in production.
inline Mat4 elementary_rz(double t)
{
  Mat4 m = Mat4::Identity();
  m(0, 0) = std::cos(t);
  m(0, 1) = -std::sin(t);
  m(1, 0) = std::sin(t);
  m(1, 1) = std::cos(t);
  return m;
}

inline Mat4 elementary_rx(double t)
{
  Mat4 m = Mat4::Identity();
  m(1, 1) = std::cos(t);
  m(1, 2) = -std::sin(t);
  m(2, 1) = std::sin(t);
  m(2, 2) = std::cos(t);
  return m;
}

inline Mat4 elementary_translation(double x, double y, double z)
{
  Mat4 m = Mat4::Identity();
  m(0, 3) = x;
  m(1, 3) = y;
  m(2, 3) = z;
  return m;
}

inline Mat4 oracle_fk(const ArmModel& model, const Vec6& q)
{
  Mat4 t = model.base_pose.matrix();
  for (int i = 0; i < kJoints; ++i) {
    const DhRow& r = model.dh[static_cast<std::size_t>(i)];
    t = t * elementary_rz(r.theta_offset + q[i]) * elementary_translation(0, 0, r.d) *
        elementary_translation(r.a, 0, 0) * elementary_rx(r.alpha);
  }
  return t;
}

inline Mat6 finite_difference_jacobian(const ArmModel& model, const Vec6& q, double h)
{
  Mat6 j;
  for (int i = 0; i < kJoints; ++i) {
    Vec6 qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Transform tp = forward_kinematics(model, qp);
    const Transform tm = forward_kinematics(model, qm);
    j.block<3, 1>(0, i) = (tp.translation() - tm.translation()) / (2 * h);
    const Eigen::AngleAxisd aa(Mat3(tp.rotation() * tm.rotation().transpose()));
    j.block<3, 1>(3, i) = aa.axis() * aa.angle() / (2 * h);
  }
  return j;
}

}  // namespace hrc::testing
