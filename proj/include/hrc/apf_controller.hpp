#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>

#include "hrc/errors.hpp"
#include "hrc/kinematics.hpp"
#include "hrc/types.hpp"

namespace hrc {

/// Gains and distance thresholds of the behavior-tree controller.
/// k_pc1, k_pc2, tau, theta_obs and d_dct have no published values; the
/// defaults here are tuning choices.
struct ControllerParams {
  double k_pc1 = 0.2;              // m/s, tanh amplitude of the position controller
  double k_pc2 = 10.0;             // 1/m, error scaling inside tanh
  double tau = 15.0;               // 1/m, space-null attenuation constant
  double theta_obs = deg2rad(70);  // rad, obstacle type threshold
  double d_at = 0.30;              // m, avoidance threshold
  double d_act = 0.10;             // m, FDCM activation
  double d_dct = 0.15;             // m, FDCM deactivation
  double v_max = 0.20;             // m/s, TCP speed cap
  double rep_gain = 0.60;          // m/s, repulsive speed scale
  double damping = 1e-3;           // damped least-squares factor
  // true: invert the full 6-DOF twist with zero angular velocity.
  // false: positional rows only, orientation left free.
  bool hold_orientation = true;

  void validate() const
  {
    if (!(d_act > 0.0 && d_act < d_dct && d_dct <= d_at)) {
      throw DomainError("controller: require 0 < d_act < d_dct <= d_at");
    }
    if (!(tau > 0.0)) {
      throw DomainError("controller: tau must be positive");
    }
    if (!(theta_obs > 0.0 && theta_obs < kPi)) {
      throw DomainError("controller: theta_obs must lie in (0, pi)");
    }
    if (!(v_max > 0.0)) {
      throw DomainError("controller: v_max must be positive");
    }
    if (!(rep_gain >= 0.0) || !(damping >= 0.0) || !(k_pc1 >= 0.0) || !(k_pc2 >= 0.0)) {
      throw DomainError("controller: gains must be non-negative");
    }
  }
};

struct GoalSpec {
  Vec3 position = Vec3::Zero();  // x_G
  Vec3 velocity = Vec3::Zero();  // feed-forward xdot_G
};

struct ObstacleState {
  Vec3 position = Vec3::Zero();  // x_O
  Vec3 velocity = Vec3::Zero();
  bool visible = true;
  double age = 0.0;  // s since the last observation
};

enum class ControlCase { NoAvoidance, AvoidType1, AvoidType2, Fdcm };
enum class ObstacleType { Type1, Type2 };

inline constexpr std::string_view to_string(ControlCase c)
{
  switch (c) {
    case ControlCase::NoAvoidance: return "NoAvoidance";
    case ControlCase::AvoidType1: return "AvoidType1";
    case ControlCase::AvoidType2: return "AvoidType2";
    case ControlCase::Fdcm: return "FDCM";
  }
  return "?";
}

struct FdcmState {
  bool active = false;
};

struct ControlDecision {
  ControlCase control_case = ControlCase::NoAvoidance;
  double d_ro = std::numeric_limits<double>::infinity();
  double theta_c = 0.0;
  Vec3 tcp_velocity_cmd = Vec3::Zero();
  Vec6 qdot_cmd = Vec6::Zero();
  double blend_weight = 0.0;
  FdcmState fdcm;               // state to thread into the next step
  bool stationary_tcp = false;  // classification fell back to Type1
  bool coincident = false;      // d_RO == 0 forced FDCM
};

struct PositionCommand {
  Vec3 v_pc = Vec3::Zero();
  Vec6 qdot = Vec6::Zero();
};

struct Classification {
  ObstacleType type = ObstacleType::Type1;
  double theta_c = 0.0;
  bool stationary_tcp = false;
};

inline Vec3 cap_speed(const Vec3& v, double v_max)
{
  const double n = v.norm();
  return n > v_max ? Vec3(v * (v_max / n)) : v;
}

/// Jacobian used for velocity inversion under the chosen orientation policy.
inline Mat6 control_jacobian(const ControllerParams& params, const ArmModel& model, const Vec6& q)
{
  Mat6 j = jacobian(model, q);
  if (!params.hold_orientation) {
    j.bottomRows<3>().setZero();
  }
  return j;
}

inline Vec6 linear_twist(const Vec3& v)
{
  Vec6 twist = Vec6::Zero();
  twist.head<3>() = v;
  return twist;
}

/// Attractive term: v_PC = xdot_G + k_pc1 * tanh(k_pc2 * (x_G - x_R)),
/// tanh taken per component, then capped at v_max. Orientation is held by
/// commanding zero angular velocity.
inline PositionCommand position_controller(const ControllerParams& params, const Vec3& x_r, const GoalSpec& goal,
                                           const Mat6& j, double damping,
                                           const Vec6& rate_caps = Vec6::Constant(
                                               std::numeric_limits<double>::infinity()))
{
  const Vec3 e = goal.position - x_r;
  const Vec3 sat = (params.k_pc2 * e).array().tanh().matrix();
  PositionCommand out;
  out.v_pc = cap_speed(goal.velocity + params.k_pc1 * sat, params.v_max);
  out.qdot = solve_joint_rates(j, linear_twist(out.v_pc), damping, rate_caps);
  return out;
}

/// theta_C is the angle between the TCP velocity and x_O - x_R. Type 1 when
/// theta_C <= theta_obs; a TCP at rest counts as Type 1.
inline Classification classify_obstacle(const Vec3& v_tcp, const Vec3& x_r, const Vec3& x_o, double theta_obs)
{
  Classification c;
  const Vec3 r = x_o - x_r;
  if (v_tcp.norm() < 1e-9 || r.norm() < 1e-12) {
    c.stationary_tcp = true;
    return c;
  }
  const double cosang = std::clamp(v_tcp.dot(r) / (v_tcp.norm() * r.norm()), -1.0, 1.0);
  c.theta_c = std::acos(cosang);
  c.type = c.theta_c <= theta_obs ? ObstacleType::Type1 : ObstacleType::Type2;
  return c;
}

/// Collision controller I: normal escape, tangential slide along the current
/// motion, and a goal-biased deflection, summed as unit vectors and scaled to
/// rep_gain. The tangential and goal terms are orthogonal to the
/// robot-obstacle axis, so the sum never vanishes.
inline Vec3 repulsive_velocity_type1(const ControllerParams& params, const Vec3& x_r, const Vec3& x_o, const Vec3& v_tcp,
                                     const Vec3& x_g)
{
  const Vec3 r = x_o - x_r;
  if (r.norm() == 0.0) {
    throw CoincidentObstacle();
  }
  const Vec3 axis = r.normalized();
  const Vec3 normal = -axis;
  const Vec3 tangential = unit_or_zero(v_tcp - v_tcp.dot(axis) * axis);
  const Vec3 to_goal = unit_or_zero(x_g - x_r);
  const Vec3 goal_dir = unit_or_zero(to_goal - to_goal.dot(axis) * axis);
  const Vec3 sum = normal + tangential + goal_dir;
  return params.rep_gain * sum.normalized();
}

/// Collision controller II: pure normal repulsion.
inline Vec3 repulsive_velocity_type2(const ControllerParams& params, const Vec3& x_r, const Vec3& x_o)
{
  const Vec3 r = x_r - x_o;
  if (r.norm() == 0.0) {
    throw CoincidentObstacle();
  }
  return params.rep_gain * r.normalized();
}

inline double blend_weight(double tau, double d_ro) { return std::exp(-tau * d_ro); }

inline Vec3 blend(const Vec3& v_pc, const Vec3& v_rep, double tau, double d_ro)
{
  const double w = blend_weight(tau, d_ro);
  return v_pc * (1.0 - w) + v_rep * w;
}

/// FDCM latch: on when the hand is inside d_act or not visible; off only once
/// it is visible and beyond d_dct.
inline FdcmState fdcm_update(FdcmState state, double d_ro, bool visible, const ControllerParams& params)
{
  if (!visible || d_ro < params.d_act) {
    return {true};
  }
  if (state.active && d_ro > params.d_dct) {
    return {false};
  }
  return state;
}

/// One tick of the behavior tree. `obstacle` is empty when no hand is tracked
/// at all (no marker in the scene), which is the obstacle-free case.
inline ControlDecision step(const ControllerParams& params, const ArmModel& model, const RobotState& robot,
                            const GoalSpec& goal, const std::optional<ObstacleState>& obstacle, FdcmState fdcm)
{
  ControlDecision out;
  const Vec3 x_r = robot.tcp_position();

  bool visible = true;
  if (obstacle) {
    visible = obstacle->visible;
    out.d_ro = (obstacle->position - x_r).norm();
    if (!std::isfinite(out.d_ro)) {
      out.d_ro = std::numeric_limits<double>::infinity();
    }
  }

  out.fdcm = obstacle ? fdcm_update(fdcm, out.d_ro, visible, params) : FdcmState{false};
  if (obstacle && out.d_ro == 0.0) {
    out.coincident = true;
    out.fdcm.active = true;
  }
  if (out.fdcm.active) {
    out.control_case = ControlCase::Fdcm;
    return out;
  }

  const Mat6 j = control_jacobian(params, model, robot.joints.q);
  const PositionCommand pc = position_controller(params, x_r, goal, j, params.damping, model.rate_caps);

  if (!obstacle || out.d_ro > params.d_at) {
    out.control_case = ControlCase::NoAvoidance;
    out.tcp_velocity_cmd = pc.v_pc;
    out.qdot_cmd = pc.qdot;
    return out;
  }

  const Vec3& x_o = obstacle->position;
  const Classification cls = classify_obstacle(robot.tcp_velocity(), x_r, x_o, params.theta_obs);
  out.theta_c = cls.theta_c;
  out.stationary_tcp = cls.stationary_tcp;

  Vec3 v_rep;
  if (cls.type == ObstacleType::Type1) {
    out.control_case = ControlCase::AvoidType1;
    v_rep = repulsive_velocity_type1(params, x_r, x_o, robot.tcp_velocity(), goal.position);
  } else {
    out.control_case = ControlCase::AvoidType2;
    v_rep = repulsive_velocity_type2(params, x_r, x_o);
  }
  out.blend_weight = blend_weight(params.tau, out.d_ro);
  out.tcp_velocity_cmd = cap_speed(blend(pc.v_pc, v_rep, params.tau, out.d_ro), params.v_max);
  out.qdot_cmd = solve_joint_rates(j, linear_twist(out.tcp_velocity_cmd), params.damping, model.rate_caps);
  return out;
}

}  // namespace hrc
