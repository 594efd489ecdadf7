#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrc/apf_controller.hpp"
#include "hrc/gimbal.hpp"
#include "hrc/kinematics.hpp"
#include "hrc/perception.hpp"
#include "hrc/safety_modes.hpp"
#include "hrc/sim/hand_model.hpp"

namespace hrc::sim {

struct GoalWaypoint {
  Vec3 position = Vec3::Zero();
  double dwell = 0.0;  // s to hold once reached
};

struct GimbalConfig {
  bool enabled = true;  // false: motors stay at their initial angles
  GimbalState initial;
  GimbalTargets targets;
  double band = deg2rad(10);  // total width, centered on the targets
  GimbalGeometry geometry;
};

struct SafetyConfig {
  double dwell = 0.1;
  std::optional<HapticSide> fixed_side;  // empty: motor facing the TCP
};

struct Workspace {
  Vec3 min = Vec3(-1.5, -1.5, -0.2);
  Vec3 max = Vec3(1.5, 1.5, 1.5);

  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string arm_file;
  ArmModel arm = ur10_model();
  Vec6 initial_q = Vec6::Zero();
  ControllerParams controller;
  CameraModel camera;
  NoiseModel noise;
  GimbalConfig gimbal;
  SafetyConfig safety;
  HandModelSpec hand;
  Vec3 forearm_offset = Vec3::Zero();  // hand point relative to the marker, marker frame
  std::vector<Occluder> occluders;
  std::vector<GoalWaypoint> waypoints;
  Workspace workspace;
  double control_dt = 0.01;
  double log_dt = 0.1;
  double duration = 60.0;
  std::uint64_t seed = 1;
  double waypoint_tolerance = 0.005;
  bool repeat_program = false;  // cycle the waypoints forever (interactive sessions)

  int log_every() const { return static_cast<int>(std::lround(log_dt / control_dt)); }

  void validate() const
  {
    arm.validate();
    controller.validate();
    camera.validate();
    if (!(control_dt > 0.0) || !(log_dt > 0.0) || control_dt > log_dt + 1e-12) {
      throw DomainError("require 0 < control_dt <= log_dt");
    }
    if (std::abs(log_every() * control_dt - log_dt) > 1e-9) {
      throw DomainError("log_dt must be an integer multiple of control_dt");
    }
    if (!(duration > 0.0)) {
      throw DomainError("duration must be positive");
    }
    if (waypoints.empty()) {
      throw DomainError("at least one goal waypoint is required");
    }
    for (const auto& w : waypoints) {
      if (!w.position.allFinite() || !(w.dwell >= 0.0)) {
        throw DomainError("goal waypoints must be finite with non-negative dwell");
      }
    }
    if (!(hand.retreat_speed >= 0.0) || !(hand.reaction_delay >= 0.0) || !(hand.max_speed >= 0.0)) {
      throw DomainError("hand: retreat_speed, reaction_delay and max_speed must be non-negative");
    }
    if ((hand.kind == HandKind::Scripted || hand.kind == HandKind::HapticReactive) && hand.waypoints.empty()) {
      throw DomainError("hand: scripted models need at least one waypoint");
    }
    for (std::size_t i = 1; i < hand.waypoints.size(); ++i) {
      if (hand.waypoints[i].t < hand.waypoints[i - 1].t) {
        throw DomainError("hand: waypoint times must be non-decreasing");
      }
    }
    if (!(noise.sigma_axes.minCoeff() >= 0.0)) {
      throw DomainError("noise: sigma must be non-negative");
    }
    if (!(gimbal.band > 0.0)) {
      throw DomainError("gimbal: band must be positive");
    }
    check_joint_limits(arm, initial_q);
  }
};

/// Same program and robot with the hand removed: the reference for collision path.
inline ScenarioConfig baseline_of(ScenarioConfig cfg)
{
  cfg.name += "_baseline";
  cfg.hand.kind = HandKind::None;
  return cfg;
}

}  // namespace hrc::sim
