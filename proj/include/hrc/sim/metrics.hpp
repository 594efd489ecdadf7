#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "hrc/sim/trace.hpp"
#include "hrc/types.hpp"

namespace hrc::sim {

inline constexpr int kHistogramBins = 60;  // 1 cm bins over [0, 0.6) m
inline constexpr double kHistogramBinWidth = 0.01;

struct Metrics {
  double min_d_ro = std::numeric_limits<double>::infinity();
  double mean_d_ro = kNaN;
  std::array<int, kHistogramBins> histogram{};
  int histogram_overflow = 0;  // samples at or beyond 0.6 m
  double tcp_path_length = 0.0;
  std::optional<double> collision_path;
  double task_time = 0.0;
  bool completed = false;
  double occlusion_time = 0.0;
  int fdcm_count = 0;
  std::size_t distance_samples = 0;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double polyline_length(const SimTrace& trace)
{
  double len = 0.0;
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    len += (trace.rows[i].x_r - trace.rows[i - 1].x_r).norm();
  }
  return len;
}

inline bool same_program(const SimTrace& a, const SimTrace& b, double tol = 1e-9)
{
  if (a.waypoints.size() != b.waypoints.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
    if ((a.waypoints[i] - b.waypoints[i]).cwiseAbs().maxCoeff() > tol) {
      return false;
    }
  }
  return true;
}

/// Distance statistics use the ground-truth hand point on every row where a
/// hand is present. Occlusion time counts logged rows with the marker lost.
inline Metrics compute_metrics(const SimTrace& trace, const SimTrace* baseline = nullptr)
{
  Metrics m;
  m.task_time = trace.task_time;
  m.completed = trace.completed;
  m.tcp_path_length = polyline_length(trace);

  double sum = 0.0;
  bool prev_fdcm = false;
  for (const auto& row : trace.rows) {
    if (row.fdcm && !prev_fdcm) {
      ++m.fdcm_count;
    }
    prev_fdcm = row.fdcm;
    if (!row.hand_present) {
      continue;
    }
    if (!row.marker_visible) {
      m.occlusion_time += trace.log_dt;
    }
    const double d = row.d_ro_true;
    if (!std::isfinite(d)) {
      continue;
    }
    ++m.distance_samples;
    sum += d;
    m.min_d_ro = std::min(m.min_d_ro, d);
    const auto bin = static_cast<long>(std::floor(d / kHistogramBinWidth + 1e-9));
    if (bin >= 0 && bin < kHistogramBins) {
      ++m.histogram[static_cast<std::size_t>(bin)];
    } else {
      ++m.histogram_overflow;
    }
  }
  if (m.distance_samples > 0) {
    m.mean_d_ro = sum / static_cast<double>(m.distance_samples);
  }
  if (baseline) {
    if (!same_program(trace, *baseline)) {
      throw MetricsError("baseline trace runs a different waypoint program");
    }
    m.collision_path = m.tcp_path_length - polyline_length(*baseline);
  }
  return m;
}

/// Mean distance recovered from the histogram (bin midpoints times counts).
/// Overflow samples are left out, so compare only when there are none.
inline double histogram_mean(const Metrics& m)
{
  double sum = 0.0;
  long n = 0;
  for (int b = 0; b < kHistogramBins; ++b) {
    sum += (b + 0.5) * kHistogramBinWidth * m.histogram[static_cast<std::size_t>(b)];
    n += m.histogram[static_cast<std::size_t>(b)];
  }
  return n > 0 ? sum / static_cast<double>(n) : kNaN;
}

struct TrackingErrorReport {
  Vec3 mean_abs = Vec3::Zero();  // per camera axis, m
  double mean_radial = 0.0;      // m
  std::size_t samples = 0;
};

/// Estimated vs true hand point over visible rows. Errors are expressed in the
/// camera frame given by camera_rotation (camera axes in base coordinates).
inline TrackingErrorReport tracking_error_report(const SimTrace& trace, const Mat3& camera_rotation = Mat3::Identity())
{
  TrackingErrorReport r;
  for (const auto& row : trace.rows) {
    if (!row.hand_present || !row.marker_visible || !row.hand_est.allFinite()) {
      continue;
    }
    const Vec3 e = camera_rotation.transpose() * (row.hand_est - row.hand_true);
    r.mean_abs += e.cwiseAbs();
    r.mean_radial += e.norm();
    ++r.samples;
  }
  if (r.samples == 0) {
    throw MetricsError("tracking error report needs at least one visible row");
  }
  r.mean_abs /= static_cast<double>(r.samples);
  r.mean_radial /= static_cast<double>(r.samples);
  return r;
}

/// Largest distance from any TCP sample in `trace` to the baseline TCP polyline.
inline double max_lateral_deviation(const SimTrace& trace, const SimTrace& baseline)
{
  double worst = 0.0;
  for (const auto& row : trace.rows) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < baseline.rows.size(); ++i) {
      const Vec3& a = baseline.rows[i - 1].x_r;
      const Vec3& b = baseline.rows[i].x_r;
      const Vec3 ab = b - a;
      const double len2 = ab.squaredNorm();
      const double s = len2 > 0.0 ? std::clamp((row.x_r - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, (a + s * ab - row.x_r).norm());
    }
    if (baseline.rows.size() == 1) {
      best = (baseline.rows[0].x_r - row.x_r).norm();
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace hrc::sim
