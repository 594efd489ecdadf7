#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hrc/perception.hpp"

namespace hrc::sim {

struct CalibrationResult {
  Vec3 sigma = Vec3::Zero();
  Vec3 achieved_mean_abs = Vec3::Zero();
  double achieved_radial = 0.0;
  int iterations = 0;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoiseStats {
  Vec3 mean_abs = Vec3::Zero();
  double mean_radial = 0.0;
};

/// Monte-Carlo error statistics of a tracker observing a marker 1 m in front
/// of a camera at the origin. Errors are reported on the camera axes.
inline NoiseStats sample_noise_stats(const NoiseModel& noise, std::size_t samples)
{
  if (samples == 0) {
    throw CalibrationError("sample count must be positive");
  }
  CameraModel camera;
  const Transform marker = Transform::from_rpy(Vec3(0.0, 0.0, 1.0), kPi, 0.0, 0.0);
  MarkerTracker tracker(noise);
  NoiseStats s;
  for (std::size_t i = 0; i < samples; ++i) {
    const MarkerObservation obs = tracker.observe(camera, marker, {}, 0.0);
    const Vec3 e = *obs.position_base - marker.translation();
    s.mean_abs += e.cwiseAbs();
    s.mean_radial += e.norm();
  }
  s.mean_abs /= static_cast<double>(samples);
  s.mean_radial /= static_cast<double>(samples);
  return s;
}

/// Finds per-axis sigma whose Monte-Carlo mean |error| matches the targets
/// within rel_tol. Starts from the half-normal closed form and rescales.
inline CalibrationResult calibrate_noise(const Vec3& targets, std::size_t samples, std::uint64_t seed = 1,
                                         double rel_tol = 0.01, int max_iterations = 20)
{
  if (!targets.allFinite() || targets.minCoeff() < 0.0) {
    throw CalibrationError("targets must be finite and non-negative");
  }
  CalibrationResult r;
  r.sigma = NoiseModel::sigma_for_mean_abs(targets);
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    NoiseModel model;
    model.sigma_axes = r.sigma;
    model.seed = seed + static_cast<std::uint64_t>(r.iterations);
    const NoiseStats s = sample_noise_stats(model, samples);
    r.achieved_mean_abs = s.mean_abs;
    r.achieved_radial = s.mean_radial;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      if (targets[k] == 0.0) {
        continue;
      }
      if (std::abs(s.mean_abs[k] - targets[k]) > rel_tol * targets[k]) {
        ok = false;
        r.sigma[k] *= targets[k] / s.mean_abs[k];
      }
    }
    if (ok) {
      return r;
    }
  }
  throw CalibrationError("noise calibration did not converge");
}

}  // namespace hrc::sim
