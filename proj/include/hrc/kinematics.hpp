#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "hrc/errors.hpp"
#include "hrc/transform.hpp"
#include "hrc/types.hpp"

namespace hrc {

inline constexpr int kJoints = 6;

/// One row of a standard (distal) Denavit-Hartenberg table:
/// A_i = Rz(theta_offset + q_i) * Tz(d) * Tx(a) * Rx(alpha).
struct DhRow {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double theta_offset = 0.0;
};

struct JointLimit {
  double lo = -2.0 * kPi;
  double hi = 2.0 * kPi;
};

struct ArmModel {
  std::array<DhRow, kJoints> dh{};
  Transform base_pose;
  std::array<JointLimit, kJoints> joint_limits{};
  Vec6 rate_caps = Vec6::Constant(std::numeric_limits<double>::infinity());

  void validate() const
  {
    for (int i = 0; i < kJoints; ++i) {
      if (!(joint_limits[i].lo < joint_limits[i].hi)) {
        throw DomainError("joint " + std::to_string(i + 1) + ": lower limit must be below upper limit");
      }
      if (!(rate_caps[i] > 0.0)) {
        throw DomainError("joint " + std::to_string(i + 1) + ": rate cap must be positive");
      }
    }
    if (!base_pose.is_valid(1e-6)) {
      throw DomainError("base pose rotation is not orthonormal");
    }
  }
};

struct JointState {
  Vec6 q = Vec6::Zero();
  Vec6 qdot = Vec6::Zero();
  double timestamp = 0.0;
  // Set by integrate() when a joint was pinned to its limit on the last step.
  std::array<bool, kJoints> at_limit{};
};

/// Universal Robots UR10 (CB-series) nominal kinematics, flange as TCP.
inline ArmModel ur10_model()
{
  ArmModel m;
  m.dh = {{
      {0.0, 0.1273, kPi / 2, 0.0},
      {-0.612, 0.0, 0.0, 0.0},
      {-0.5723, 0.0, 0.0, 0.0},
      {0.0, 0.163941, kPi / 2, 0.0},
      {0.0, 0.1157, -kPi / 2, 0.0},
      {0.0, 0.0922, 0.0, 0.0},
  }};
  m.rate_caps << deg2rad(120), deg2rad(120), deg2rad(180), deg2rad(180), deg2rad(180), deg2rad(180);
  return m;
}

inline void check_joint_limits(const ArmModel& model, const Vec6& q)
{
  for (int i = 0; i < kJoints; ++i) {
    const auto& lim = model.joint_limits[i];
    if (!std::isfinite(q[i]) || q[i] < lim.lo || q[i] > lim.hi) {
      throw JointLimitError(i, q[i], lim.lo, lim.hi);
    }
  }
}

inline Transform dh_transform(const DhRow& row, double q)
{
  const double th = row.theta_offset + q;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Mat3 r;
  r << ct, -st * ca, st * sa,
       st, ct * ca, -ct * sa,
       0.0, sa, ca;
  return {r, Vec3(row.a * ct, row.a * st, row.d)};
}

/// Base-frame poses of frames 0..6; frame i is the output of joint i.
/// Frame 0 is the arm base and frame 6 the TCP.
inline std::array<Transform, kJoints + 1> joint_frames(const ArmModel& model, const Vec6& q)
{
  check_joint_limits(model, q);
  std::array<Transform, kJoints + 1> frames;
  frames[0] = model.base_pose;
  for (int i = 0; i < kJoints; ++i) {
    frames[i + 1] = frames[i] * dh_transform(model.dh[i], q[i]);
  }
  return frames;
}

inline Transform forward_kinematics(const ArmModel& model, const Vec6& q) { return joint_frames(model, q)[kJoints]; }

/// Geometric Jacobian of the TCP twist [v; w] with respect to joint rates.
inline Mat6 jacobian(const ArmModel& model, const Vec6& q)
{
  const auto frames = joint_frames(model, q);
  const Vec3 p_tcp = frames[kJoints].translation();
  Mat6 j;
  for (int i = 0; i < kJoints; ++i) {
    const Vec3 z = frames[i].rotation().col(2);
    j.block<3, 1>(0, i) = z.cross(p_tcp - frames[i].translation());
    j.block<3, 1>(3, i) = z;
  }
  return j;
}

/// Uniformly scales qdot so that no component exceeds its cap.
inline Vec6 clamp_rates(const Vec6& qdot, const Vec6& caps)
{
  double scale = 1.0;
  for (int i = 0; i < kJoints; ++i) {
    const double mag = std::abs(qdot[i]);
    if (mag > caps[i]) {
      scale = std::min(scale, caps[i] / mag);
    }
  }
  return qdot * scale;
}

/// Damped least-squares joint rates: argmin |J qdot - v|^2 + damping^2 |qdot|^2,
/// evaluated through the SVD of J so that damping = 0 degrades to the
/// pseudo-inverse on rank-deficient J. The result is rate-capped.
inline Vec6 solve_joint_rates(const Mat6& j, const Vec6& tcp_velocity, double damping,
                              const Vec6& rate_caps = Vec6::Constant(std::numeric_limits<double>::infinity()))
{
  if (!j.allFinite() || !tcp_velocity.allFinite() || !std::isfinite(damping)) {
    throw DomainError("solve_joint_rates: non-finite input");
  }
  if (damping < 0.0) {
    throw DomainError("solve_joint_rates: damping must be non-negative");
  }
  const Eigen::JacobiSVD<Mat6> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec6& sigma = svd.singularValues();
  const double lambda2 = damping * damping;
  const double cutoff = sigma[0] * 1e-12;
  Vec6 coeffs = svd.matrixU().transpose() * tcp_velocity;
  for (int k = 0; k < kJoints; ++k) {
    const double s = sigma[k];
    if (lambda2 == 0.0 && s <= cutoff) {
      coeffs[k] = 0.0;
    } else {
      coeffs[k] *= s / (s * s + lambda2);
    }
  }
  return clamp_rates(svd.matrixV() * coeffs, rate_caps);
}

inline Vec6 solve_joint_rates(const ArmModel& model, const Vec6& q, const Vec6& tcp_velocity, double damping)
{
  return solve_joint_rates(jacobian(model, q), tcp_velocity, damping, model.rate_caps);
}

/// Explicit Euler step q' = q + qdot dt, pinned to the joint limits.
inline JointState integrate(const ArmModel& model, const JointState& state, const Vec6& qdot, double dt)
{
  JointState next;
  next.qdot = qdot;
  next.timestamp = state.timestamp + dt;
  for (int i = 0; i < kJoints; ++i) {
    const auto& lim = model.joint_limits[i];
    const double q = state.q[i] + qdot[i] * dt;
    next.q[i] = std::clamp(q, lim.lo, lim.hi);
    next.at_limit[i] = q < lim.lo || q > lim.hi;
  }
  return next;
}

/// Joint state plus the derived TCP pose x_R and TCP twist J * qdot.
struct RobotState {
  JointState joints;
  Transform tcp_pose;
  Vec6 tcp_twist = Vec6::Zero();

  Vec3 tcp_position() const { return tcp_pose.translation(); }
  Vec3 tcp_velocity() const { return tcp_twist.head<3>(); }
};

inline RobotState make_robot_state(const ArmModel& model, const JointState& joints)
{
  RobotState s;
  s.joints = joints;
  const auto frames = joint_frames(model, joints.q);
  s.tcp_pose = frames[kJoints];
  s.tcp_twist = jacobian(model, joints.q) * joints.qdot;
  return s;
}

}  // namespace hrc
