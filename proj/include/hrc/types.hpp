#pragma once

#include <Eigen/Dense>

namespace hrc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Unit vector, or zero when the input is shorter than eps.
inline Vec3 unit_or_zero(const Vec3& v, double eps = 1e-9)
{
  const double n = v.norm();
  return n > eps ? Vec3(v / n) : Vec3::Zero();
}

}  // namespace hrc
