#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hrc/apf_controller.hpp"
#include "hrc/safety_modes.hpp"
#include "hrc/types.hpp"

namespace hrc::sim {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One logged sample. d_ro is what the controller saw (estimated hand);
/// d_ro_true uses the ground-truth hand point.
struct TraceRow {
  double t = 0.0;
  Vec6 q = Vec6::Zero();
  Vec3 x_r = Vec3::Zero();
  Vec3 v_cmd = Vec3::Zero();
  ControlCase control_case = ControlCase::NoAvoidance;
  double d_ro = kNaN;
  double d_ro_true = kNaN;
  double theta_c = 0.0;
  double blend_weight = 0.0;
  SafetyMode mode = SafetyMode::Mode1;
  bool vib_left = false;
  bool vib_right = false;
  bool fdcm = false;
  bool hand_present = false;
  bool marker_visible = false;
  double marker_angle_y = kNaN;
  double marker_angle_x = kNaN;
  double gimbal_lower = 0.0;
  double gimbal_upper = 0.0;
  Vec3 hand_true = Vec3::Constant(kNaN);
  Vec3 hand_est = Vec3::Constant(kNaN);
  int goal_index = 0;
};

struct SimTrace {
  std::string scenario;
  std::uint64_t seed = 0;
  double control_dt = 0.01;
  double log_dt = 0.1;
  std::vector<Vec3> waypoints;  // goal program, used to match trials
  bool completed = false;
  double task_time = 0.0;  // completion time, or the elapsed duration when incomplete
  std::vector<TraceRow> rows;
};

}  // namespace hrc::sim
