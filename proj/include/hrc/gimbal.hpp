#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "hrc/kinematics.hpp"
#include "hrc/perception.hpp"
#include "hrc/transform.hpp"
#include "hrc/types.hpp"

namespace hrc {

// Motor 0 (lower) turns about the forearm axis and mainly moves the camera-y
// inclination; motor 1 (upper) tilts the marker and mainly moves the camera-x
// inclination.
inline constexpr int kLowerMotor = 0;
inline constexpr int kUpperMotor = 1;

struct GimbalState {
  std::array<double, 2> motor_angles{0.0, 0.0};
  std::array<JointLimit, 2> limits{JointLimit{-kPi / 2, kPi / 2}, JointLimit{-kPi / 2, kPi / 2}};
  double max_rate = 3.5;                  // rad/s
  std::array<double, 2> axis_sign{1.0, 1.0};  // sign of d(marker angle)/d(motor angle)
  std::array<bool, 2> saturated{false, false};
};

struct MarkerAngles {
  double angle_y = 0.0;
  double angle_x = 0.0;
  bool degenerate = false;  // previous angles were held
};

struct OrientationError {
  double err_y = 0.0;
  double err_x = 0.0;
};

struct GimbalTargets {
  double angle_y = deg2rad(40);
  double angle_x = deg2rad(20);
};

/// Link offsets of the two-joint wearable, forearm frame: x along the forearm
/// toward the hand, z out of the back of the forearm.
struct GimbalGeometry {
  double lower_to_upper = 0.02;   // m along z after the lower joint
  double upper_to_marker = 0.01;  // m along z after the upper joint
};

/// Inclination of the marker face normal in the camera frame. The normal is
/// written n = Ry(angle_y) * Rx(angle_x) * (0, 0, -1), so a marker squarely
/// facing the camera reads (0, 0). Extraction order: x first, then y.
inline MarkerAngles marker_angles(const Mat3& marker_orientation_base, const CameraModel& camera,
                                  const MarkerAngles& previous = {})
{
  const Vec3 n = camera.pose_in_base.rotation().transpose() * marker_orientation_base.col(2);
  const double cx = std::hypot(n.x(), n.z());
  if (cx < 1e-9) {
    MarkerAngles held = previous;
    held.degenerate = true;
    return held;
  }
  MarkerAngles out;
  out.angle_x = std::asin(std::clamp(n.y(), -1.0, 1.0));
  out.angle_y = std::atan2(-n.x(), -n.z());
  return out;
}

// Inverse of marker_angles: camera-frame normal for the given inclinations.
inline Vec3 normal_from_angles(double angle_y, double angle_x)
{
  return {-std::sin(angle_y) * std::cos(angle_x), std::sin(angle_x), -std::cos(angle_y) * std::cos(angle_x)};
}

// Wraps to (-pi, pi].
inline double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

inline OrientationError orientation_error(const MarkerAngles& angles, const GimbalTargets& targets)
{
  return {wrap_angle(angles.angle_y - targets.angle_y), wrap_angle(angles.angle_x - targets.angle_x)};
}

/// Dead-band regulator. An axis whose error lies within +-band/2 is left
/// alone; otherwise its motor moves against the error at
/// min(max_rate, |err| / dt), then is clamped to the mechanical limits.
inline GimbalState hysteresis_step(const GimbalState& state, const OrientationError& error, double band, double dt)
{
  GimbalState next = state;
  const std::array<double, 2> errs{error.err_y, error.err_x};
  for (int i = 0; i < 2; ++i) {
    next.saturated[i] = false;
    const double e = errs[i];
    if (std::abs(e) <= band / 2) {
      continue;
    }
    const double move = std::min(state.max_rate * dt, std::abs(e));
    const double target = state.motor_angles[i] - state.axis_sign[i] * std::copysign(move, e);
    next.motor_angles[i] = std::clamp(target, state.limits[i].lo, state.limits[i].hi);
    next.saturated[i] = next.motor_angles[i] != target;
  }
  return next;
}

/// Forward kinematics of the wearable: forearm * Rx(lower) * Tz * Ry(upper) * Tz.
inline Transform marker_pose(const Transform& forearm_pose, const GimbalState& state,
                             const GimbalGeometry& geometry = {})
{
  return forearm_pose * Transform::rot_x(state.motor_angles[kLowerMotor]) *
         Transform::from_translation(Vec3(0, 0, geometry.lower_to_upper)) *
         Transform::rot_y(state.motor_angles[kUpperMotor]) *
         Transform::from_translation(Vec3(0, 0, geometry.upper_to_marker));
}

}  // namespace hrc
