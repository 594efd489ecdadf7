#pragma once

#include <ostream>
#include <string>

#include "hrc/sim/metrics.hpp"
#include "hrc/sim/trace.hpp"
#include "hrc/sim/trace_io.hpp"

namespace hrc::sim {

/// Four trials of one waypoint program: no hand, static marker, gimbal,
/// gimbal with haptic reaction. All deltas are derived from the metrics.
struct TrialComparison {
  Metrics baseline;
  Metrics static_marker;
  Metrics gimbal;
  Metrics haptic;

  // Relative reduction from `before` to `after` in percent; 0 when before <= 0.
  static double reduction_pct(double before, double after) { return before > 0.0 ? 100.0 * (before - after) / before : 0.0; }

  double task_time_improvement_pct() const { return reduction_pct(static_marker.task_time, gimbal.task_time); }
  double haptic_task_time_improvement_pct() const { return reduction_pct(static_marker.task_time, haptic.task_time); }
  double occlusion_reduction_pct() const { return reduction_pct(static_marker.occlusion_time, gimbal.occlusion_time); }
  double collision_path_reduction_pct() const
  {
    return reduction_pct(static_marker.collision_path.value_or(0.0), haptic.collision_path.value_or(0.0));
  }
  double mean_distance_increase() const { return haptic.mean_d_ro - gimbal.mean_d_ro; }
  double min_distance_increase() const { return haptic.min_d_ro - gimbal.min_d_ro; }
};

struct TrialTraces {
  SimTrace baseline;
  SimTrace static_marker;
  SimTrace gimbal;
  SimTrace haptic;
};

/// Throws MetricsError when any trial runs a different waypoint program.
inline TrialComparison compare_trials(const TrialTraces& t)
{
  TrialComparison c;
  c.baseline = compute_metrics(t.baseline, &t.baseline);
  c.static_marker = compute_metrics(t.static_marker, &t.baseline);
  c.gimbal = compute_metrics(t.gimbal, &t.baseline);
  c.haptic = compute_metrics(t.haptic, &t.baseline);
  return c;
}

inline nlohmann::json comparison_to_json(const TrialComparison& c)
{
  return {{"schema", "hrc.comparison"},
          {"version", 1},
          {"trials",
           {{"baseline", metrics_to_json(c.baseline)},
            {"static_marker", metrics_to_json(c.static_marker)},
            {"gimbal", metrics_to_json(c.gimbal)},
            {"gimbal_haptic", metrics_to_json(c.haptic)}}},
          {"deltas",
           {{"task_time_improvement_pct", c.task_time_improvement_pct()},
            {"haptic_task_time_improvement_pct", c.haptic_task_time_improvement_pct()},
            {"occlusion_reduction_pct", c.occlusion_reduction_pct()},
            {"collision_path_reduction_pct", c.collision_path_reduction_pct()},
            {"mean_distance_increase", detail::num(c.mean_distance_increase())},
            {"min_distance_increase", detail::num(c.min_distance_increase())}}}};
}

inline void write_comparison_table(const TrialComparison& c, std::ostream& os)
{
  auto line = [&os](const char* name, const Metrics& m) {
    os << name << ',' << fmt9(m.task_time) << ',' << fmt9(m.occlusion_time) << ',' << fmt9(m.tcp_path_length) << ','
       << fmt9(m.collision_path.value_or(0.0)) << ',' << fmt9(m.min_d_ro) << ',' << fmt9(m.mean_d_ro) << ','
       << m.fdcm_count << '\n';
  };
  os << "trial,task_time,occlusion_time,tcp_path_length,collision_path,min_d_RO,mean_d_RO,fdcm_count\n";
  line("baseline", c.baseline);
  line("static_marker", c.static_marker);
  line("gimbal", c.gimbal);
  line("gimbal_haptic", c.haptic);
}

/// Distance histogram per trial: counts per 1 cm bin from 0 to 60 cm.
inline void write_histogram_csv(const TrialComparison& c, std::ostream& os)
{
  os << "bin_lo_cm,bin_hi_cm,static_marker,gimbal,gimbal_haptic\n";
  for (int b = 0; b < kHistogramBins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    os << b << ',' << b + 1 << ',' << c.static_marker.histogram[i] << ',' << c.gimbal.histogram[i] << ','
       << c.haptic.histogram[i] << '\n';
  }
}

/// TCP-to-hand distance over time, long format.
inline void write_distance_csv(const TrialTraces& t, std::ostream& os)
{
  os << "trial,t,d_RO\n";
  auto dump = [&os](const char* name, const SimTrace& trace) {
    for (const auto& r : trace.rows) {
      if (r.hand_present) {
        os << name << ',' << fmt9(r.t) << ',' << fmt9(r.d_ro_true) << '\n';
      }
    }
  };
  dump("static_marker", t.static_marker);
  dump("gimbal", t.gimbal);
  dump("gimbal_haptic", t.haptic);
}

}  // namespace hrc::sim
