#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrc/safety_modes.hpp"
#include "hrc/transform.hpp"
#include "hrc/types.hpp"

namespace hrc::sim {

enum class HandKind { None, Scripted, HapticReactive, Interactive };

inline constexpr std::string_view to_string(HandKind k)
{
  switch (k) {
    case HandKind::None: return "none";
    case HandKind::Scripted: return "scripted";
    case HandKind::HapticReactive: return "haptic_reactive";
    case HandKind::Interactive: return "interactive";
  }
  return "?";
}

struct HandWaypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

/// Forearm orientation over time: a fixed roll/pitch/yaw attitude plus
/// sinusoidal roll (pronation) and pitch (wrist flexion) excursions.
/// Forearm frame: x toward the hand, z out of the back of the forearm.
struct ForearmProfile {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double roll_amplitude = 0.0;
  double roll_period = 1.0;
  double pitch_amplitude = 0.0;
  double pitch_period = 1.0;

  Mat3 orientation_at(double t) const
  {
    const double r = roll + roll_amplitude * std::sin(2.0 * kPi * t / roll_period);
    const double p = pitch + pitch_amplitude * std::sin(2.0 * kPi * t / pitch_period);
    return Transform::from_rpy(Vec3::Zero(), r, p, yaw).rotation();
  }
};

struct HandModelSpec {
  HandKind kind = HandKind::None;
  std::vector<HandWaypoint> waypoints;  // Scripted / HapticReactive reference path
  bool repeat = false;                  // loop the reference path with period = last waypoint time
  double retreat_speed = 0.1;           // m/s, HapticReactive
  double reaction_delay = 0.3;          // s, HapticReactive
  double max_speed = 0.3;               // m/s, Interactive rate limit
  std::string input_channel = "console";
  ForearmProfile forearm;
};

struct HandState {
  double t = 0.0;
  Vec3 reference = Vec3::Zero();  // scripted position
  Vec3 retreat = Vec3::Zero();    // accumulated haptic retreat
  Vec3 position = Vec3::Zero();   // reference + retreat, or the interactive position
  double vibration_time = 0.0;    // duration of the current uninterrupted vibration
  std::optional<Vec3> command;    // latest interactive target
};

/// Piecewise-linear interpolation of the reference path.
inline Vec3 scripted_position(const HandModelSpec& spec, double t)
{
  const auto& w = spec.waypoints;
  if (w.empty()) {
    return Vec3::Zero();
  }
  if (spec.repeat && w.back().t > 0.0) {
    t = std::fmod(t, w.back().t);
  }
  if (t <= w.front().t) {
    return w.front().position;
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (t <= w[i].t) {
      const double span = w[i].t - w[i - 1].t;
      const double s = span > 0.0 ? (t - w[i - 1].t) / span : 1.0;
      return w[i - 1].position + s * (w[i].position - w[i - 1].position);
    }
  }
  return w.back().position;
}

inline HandState initial_hand_state(const HandModelSpec& spec)
{
  HandState s;
  s.reference = scripted_position(spec, 0.0);
  s.position = s.reference;
  return s;
}

/// Advances the hand by dt. HapticReactive: once vibration has lasted longer
/// than reaction_delay, the hand backs away from the TCP along
/// unit(hand - tcp) at retreat_speed for as long as a motor is on.
inline HandState hand_update(const HandModelSpec& spec, const HandState& state, const SafetySnapshot& safety,
                             const Vec3& tcp, double dt)
{
  HandState next = state;
  next.t = state.t + dt;
  switch (spec.kind) {
    case HandKind::None:
      break;
    case HandKind::Scripted:
      next.reference = scripted_position(spec, next.t);
      next.position = next.reference;
      break;
    case HandKind::HapticReactive: {
      next.reference = scripted_position(spec, next.t);
      next.vibration_time = safety.any_vibration() ? state.vibration_time + dt : 0.0;
      if (next.vibration_time > spec.reaction_delay + 1e-12) {
        next.retreat += unit_or_zero(state.position - tcp) * spec.retreat_speed * dt;
      }
      next.position = next.reference + next.retreat;
      break;
    }
    case HandKind::Interactive:
      if (state.command) {
        const Vec3 delta = *state.command - state.position;
        const double max_step = spec.max_speed * dt;
        next.position = delta.norm() > max_step ? Vec3(state.position + delta.normalized() * max_step) : *state.command;
      }
      next.reference = next.position;
      break;
  }
  return next;
}

inline Transform forearm_pose(const HandModelSpec& spec, const HandState& state)
{
  return {spec.forearm.orientation_at(state.t), state.position};
}

}  // namespace hrc::sim
