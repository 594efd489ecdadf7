#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <variant>

#include "hrc/errors.hpp"
#include "hrc/transform.hpp"
#include "hrc/types.hpp"

namespace hrc {

/// Pinhole camera placed in the robot base frame (T_B^C). Camera axes follow
/// the image convention: z along the optical axis, x right, y down.
struct CameraModel {
  Transform pose_in_base;
  double horizontal_fov = deg2rad(70);
  double vertical_fov = deg2rad(45);
  double max_range = 3.0;
  double max_incidence = deg2rad(60);

  void validate() const
  {
    if (!(horizontal_fov > 0.0 && horizontal_fov < kPi) || !(vertical_fov > 0.0 && vertical_fov < kPi)) {
      throw DomainError("camera: field of view must lie in (0, pi)");
    }
    if (!(max_range > 0.0)) {
      throw DomainError("camera: max_range must be positive");
    }
    if (!pose_in_base.is_valid(1e-6)) {
      throw DomainError("camera: pose rotation is not orthonormal");
    }
  }
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// Segment a-b swept by a sphere of the given radius.
struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

using Occluder = std::variant<Sphere, Capsule>;

enum class VisibilityReason { Visible, BehindCamera, OutsideFov, OutOfRange, Incidence, Occluded };

struct Visibility {
  bool visible = false;
  double incidence = 0.0;
  VisibilityReason reason = VisibilityReason::Visible;
};

struct NoiseModel {
  Vec3 sigma_axes = Vec3::Zero();  // m, per camera axis
  Vec3 bias_axes = Vec3::Zero();   // m, per camera axis
  std::uint64_t seed = 1;
  // Optional growth of sigma with depth: sigma * (1 + depth_scale * z_cam). Off by default.
  double depth_scale = 0.0;

  // Zero-mean Gaussian sigma whose mean absolute value equals the target.
  static Vec3 sigma_for_mean_abs(const Vec3& mean_abs) { return mean_abs * std::sqrt(kPi / 2.0); }

  // Per-axis mean absolute errors of 0.8, 0.7 and 1.1 cm.
  static NoiseModel calibrated_default() { return {sigma_for_mean_abs(Vec3(0.008, 0.007, 0.011)), Vec3::Zero(), 1, 0.0}; }
};

struct MarkerObservation {
  bool visible = false;
  std::optional<Vec3> position_base;  // noisy; empty when not visible
  std::optional<Mat3> orientation_base;
  double incidence_angle = 0.0;
  double timestamp = 0.0;
};

/// Camera pose from a reference marker at a known base pose T_B^M and its
/// detection in the camera T_C^M: T_B^C = T_B^M * (T_C^M)^-1.
inline Transform calibrate_extrinsics(const Transform& t_b_m, const Transform& t_c_m) { return t_b_m * t_c_m.inverse(); }

inline double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p)
{
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

// Closest distance between segments p0-p1 and q0-q1.
inline double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1)
{
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) {
    return r.norm();
  }
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-18 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

inline bool blocks_segment(const Occluder& occ, const Vec3& a, const Vec3& b)
{
  return std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return segment_point_distance(a, b, o.center) < o.radius;
        } else {
          return segment_segment_distance(a, b, o.a, o.b) < o.radius;
        }
      },
      occ);
}

/// Geometric detectability of a marker whose +z axis is its face normal.
inline Visibility check_visibility(const CameraModel& camera, const Transform& marker_pose_base,
                                   std::span<const Occluder> occluders)
{
  Visibility v;
  const Vec3 cam_pos = camera.pose_in_base.translation();
  const Vec3 marker_pos = marker_pose_base.translation();
  const Vec3 to_camera = cam_pos - marker_pos;
  const Vec3 normal = marker_pose_base.rotation().col(2);
  const double range = to_camera.norm();
  v.incidence = range > 0.0 ? std::acos(std::clamp(normal.dot(to_camera) / range, -1.0, 1.0)) : 0.0;

  const Vec3 p = camera.pose_in_base.inverse().apply(marker_pos);
  if (p.z() <= 0.0) {
    v.reason = VisibilityReason::BehindCamera;
  } else if (std::abs(std::atan2(p.x(), p.z())) > camera.horizontal_fov / 2 ||
             std::abs(std::atan2(p.y(), p.z())) > camera.vertical_fov / 2) {
    v.reason = VisibilityReason::OutsideFov;
  } else if (range > camera.max_range) {
    v.reason = VisibilityReason::OutOfRange;
  } else if (v.incidence > camera.max_incidence) {
    v.reason = VisibilityReason::Incidence;
  } else {
    v.reason = VisibilityReason::Visible;
    for (const auto& occ : occluders) {
      if (blocks_segment(occ, cam_pos, marker_pos)) {
        v.reason = VisibilityReason::Occluded;
        break;
      }
    }
  }
  v.visible = v.reason == VisibilityReason::Visible;
  return v;
}

/// Synthetic marker tracker. Owns the seeded noise stream, so one instance
/// belongs to one simulation. Noise is drawn in the camera frame and rotated
/// into the base frame.
class MarkerTracker {
 public:
  explicit MarkerTracker(NoiseModel noise) : noise_(noise), rng_(noise.seed) {}

  const NoiseModel& noise() const { return noise_; }

  MarkerObservation observe(const CameraModel& camera, const Transform& marker_pose_base,
                            std::span<const Occluder> occluders, double t)
  {
    MarkerObservation obs;
    obs.timestamp = t;
    const Visibility vis = check_visibility(camera, marker_pose_base, occluders);
    obs.incidence_angle = vis.incidence;
    obs.visible = vis.visible;
    if (!vis.visible) {
      return obs;
    }
    Vec3 err_cam = noise_.bias_axes;
    double scale = 1.0;
    if (noise_.depth_scale != 0.0) {
      scale += noise_.depth_scale * camera.pose_in_base.inverse().apply(marker_pose_base.translation()).z();
    }
    for (int k = 0; k < 3; ++k) {
      err_cam[k] += draw(noise_.sigma_axes[k] * scale);
    }
    obs.position_base = marker_pose_base.translation() + camera.pose_in_base.rotation() * err_cam;
    obs.orientation_base = marker_pose_base.rotation();
    return obs;
  }

 private:
  double draw(double sigma)
  {
    if (sigma <= 0.0) {
      return 0.0;
    }
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }

  NoiseModel noise_;
  std::mt19937_64 rng_;
};

/// Hand reference point: marker position plus an offset in the marker frame.
inline Vec3 hand_position(const MarkerObservation& obs, const Vec3& forearm_offset)
{
  if (!obs.visible || !obs.position_base || !obs.orientation_base) {
    throw NotVisible();
  }
  return *obs.position_base + *obs.orientation_base * forearm_offset;
}

}  // namespace hrc
