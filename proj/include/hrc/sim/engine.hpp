#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "hrc/apf_controller.hpp"
#include "hrc/gimbal.hpp"
#include "hrc/kinematics.hpp"
#include "hrc/perception.hpp"
#include "hrc/safety_modes.hpp"
#include "hrc/sim/hand_model.hpp"
#include "hrc/sim/scenario.hpp"
#include "hrc/sim/trace.hpp"

namespace hrc::sim {

// Inbound commands for interactive sessions. They are queued from any thread
// and applied at the start of the next control step.
struct HandMove {
  Vec3 position;
};
struct Pause {};
struct Resume {};
struct Reset {};
struct SetParam {
  std::string name;
  double value = 0.0;
};
using Command = std::variant<HandMove, Pause, Resume, Reset, SetParam>;

// Names accepted by SetParam.
inline bool is_tunable_param(const std::string& name)
{
  return name == "retreat_speed" || name == "v_max" || name == "theta_OBS";
}

/// Snapshot of the engine after the latest step, for streaming.
struct LiveState {
  TraceRow row;
  bool paused = false;
  bool finished = false;
};

/// Fixed-step scenario engine. Each step runs: commands, hand, gimbal,
/// perception, safety modes, behavior tree, joint integration, waypoint
/// bookkeeping. A given (config, seed) always produces the same trace.
class Engine {
 public:
  explicit Engine(ScenarioConfig config, bool record_trace = true)
      : config_(std::move(config)), record_(record_trace), tracker_(config_.noise),
        safety_(config_.controller, config_.safety.dwell)
  {
    config_.validate();
    reset_state();
  }

  const ScenarioConfig& config() const { return config_; }
  bool finished() const { return finished_; }
  bool paused() const { return paused_; }
  double time() const { return static_cast<double>(step_index_) * config_.control_dt; }
  const SimTrace& trace() const { return trace_; }
  SimTrace take_trace() { return std::move(trace_); }
  const LiveState& live() const { return live_; }
  std::size_t goal_index() const { return goal_index_; }

  void push(Command cmd)
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(cmd));
  }

  /// Runs until the program completes or the duration elapses.
  void run_to_end()
  {
    const auto max_steps = static_cast<long>(std::llround(config_.duration / config_.control_dt));
    while (!finished_ && step_index_ < max_steps) {
      step();
    }
    if (!finished_) {
      trace_.task_time = time();
    }
  }

  void step()
  {
    drain_commands();
    if (paused_ || (finished_ && !config_.repeat_program)) {
      live_.paused = paused_;
      live_.finished = finished_;
      return;
    }
    const double dt = config_.control_dt;
    const double t = time();
    const bool hand_present = config_.hand.kind != HandKind::None;
    const Vec3 x_r = robot_.tcp_position();

    TraceRow row;
    row.t = t;
    row.q = robot_.joints.q;
    row.x_r = x_r;
    row.hand_present = hand_present;
    row.goal_index = static_cast<int>(goal_index_);

    std::optional<ObstacleState> obstacle;
    SafetySnapshot safety = select_mode(std::numeric_limits<double>::infinity(), true, config_.controller);
    if (hand_present) {
      if (step_index_ > 0) {
        hand_ = hand_update(config_.hand, hand_, last_safety_, x_r, dt);
      }
      const Transform forearm = forearm_pose(config_.hand, hand_);
      Transform mpose = marker_pose(forearm, gimbal_, config_.gimbal.geometry);
      angles_ = marker_angles(mpose.rotation(), config_.camera, angles_);
      if (config_.gimbal.enabled) {
        gimbal_ = hysteresis_step(gimbal_, orientation_error(angles_, config_.gimbal.targets),
                                  config_.gimbal.band, dt);
        mpose = marker_pose(forearm, gimbal_, config_.gimbal.geometry);
        angles_ = marker_angles(mpose.rotation(), config_.camera, angles_);
      }

      const MarkerObservation obs = tracker_.observe(config_.camera, mpose, config_.occluders, t);
      if (obs.visible) {
        estimate_ = hand_position(obs, config_.forearm_offset);
        estimate_age_ = 0.0;
      } else {
        estimate_age_ += dt;
      }
      const Vec3 hand_true = mpose.apply(config_.forearm_offset);

      ObstacleState o;
      o.visible = obs.visible;
      o.age = obs.visible ? 0.0 : std::max(estimate_age_, dt);
      o.position = estimate_ ? *estimate_ : Vec3::Constant(std::numeric_limits<double>::infinity());
      obstacle = o;

      const double d_est = estimate_ ? (*estimate_ - x_r).norm() : std::numeric_limits<double>::infinity();
      const HapticSide side = config_.safety.fixed_side.value_or(facing_side(forearm, x_r));
      safety = safety_.update(d_est, obs.visible, side, t);

      row.marker_visible = obs.visible;
      row.marker_angle_y = angles_.angle_y;
      row.marker_angle_x = angles_.angle_x;
      row.hand_true = hand_true;
      row.d_ro_true = (hand_true - x_r).norm();
      if (obs.visible) {
        row.hand_est = *estimate_;
      }
    }
    last_safety_ = safety;
    row.gimbal_lower = gimbal_.motor_angles[kLowerMotor];
    row.gimbal_upper = gimbal_.motor_angles[kUpperMotor];
    row.mode = safety.mode;
    row.vib_left = safety.vib_left;
    row.vib_right = safety.vib_right;

    GoalSpec goal;
    goal.position = config_.waypoints[goal_index_].position;
    const ControlDecision decision = hrc::step(config_.controller, config_.arm, robot_, goal, obstacle, fdcm_);
    fdcm_ = decision.fdcm;

    row.v_cmd = decision.tcp_velocity_cmd;
    row.control_case = decision.control_case;
    row.d_ro = decision.d_ro;
    row.theta_c = decision.theta_c;
    row.blend_weight = decision.blend_weight;
    row.fdcm = decision.fdcm.active;

    if (step_index_ % config_.log_every() == 0) {
      check_finite(row);
      if (record_) {
        trace_.rows.push_back(row);
      }
    }

    const JointState joints = integrate(config_.arm, robot_.joints, decision.qdot_cmd, dt);
    if (!joints.q.allFinite()) {
      throw SimulationAbort(trace_.rows.size(), "non-finite joint angles");
    }
    robot_ = make_robot_state(config_.arm, joints);
    ++step_index_;
    advance_waypoints(decision.fdcm.active);

    live_.row = row;
    live_.paused = paused_;
    live_.finished = finished_;
  }

 private:
  void reset_state()
  {
    step_index_ = 0;
    goal_index_ = 0;
    finished_ = false;
    dwell_elapsed_.reset();
    tracker_ = MarkerTracker(config_.noise);
    safety_ = SafetyMonitor(config_.controller, config_.safety.dwell);
    fdcm_ = {};
    estimate_.reset();
    estimate_age_ = 0.0;
    angles_ = {};
    gimbal_ = config_.gimbal.initial;
    hand_ = initial_hand_state(config_.hand);
    last_safety_ = select_mode(std::numeric_limits<double>::infinity(), true, config_.controller);
    JointState joints;
    joints.q = config_.initial_q;
    robot_ = make_robot_state(config_.arm, joints);

    trace_ = {};
    trace_.scenario = config_.name;
    trace_.seed = config_.noise.seed;
    trace_.control_dt = config_.control_dt;
    trace_.log_dt = config_.log_dt;
    for (const auto& w : config_.waypoints) {
      trace_.waypoints.push_back(w.position);
    }
    live_ = {};
    live_.row.x_r = robot_.tcp_position();
    live_.row.q = robot_.joints.q;
  }

  // Dwell time accrues only while the robot is under control, so a halt
  // during a dwell does not cut the settling motion short.
  void advance_waypoints(bool halted)
  {
    if (finished_) {
      return;
    }
    const double t = time();
    const auto& wp = config_.waypoints[goal_index_];
    if ((wp.position - robot_.tcp_position()).norm() >= config_.waypoint_tolerance) {
      dwell_elapsed_.reset();
      return;
    }
    if (!dwell_elapsed_) {
      dwell_elapsed_ = 0.0;
    } else if (!halted) {
      *dwell_elapsed_ += config_.control_dt;
    }
    if (*dwell_elapsed_ + 1e-9 < wp.dwell) {
      return;
    }
    dwell_elapsed_.reset();
    if (goal_index_ + 1 < config_.waypoints.size()) {
      ++goal_index_;
    } else if (config_.repeat_program) {
      goal_index_ = 0;
    } else {
      finished_ = true;
      trace_.completed = true;
      trace_.task_time = t;
    }
  }

  void check_finite(const TraceRow& row) const
  {
    if (!row.q.allFinite() || !row.x_r.allFinite() || !row.v_cmd.allFinite()) {
      throw SimulationAbort(trace_.rows.size(), "non-finite robot state");
    }
  }

  void drain_commands()
  {
    std::deque<Command> pending;
    {
      std::lock_guard lock(queue_mutex_);
      pending.swap(queue_);
    }
    for (auto& cmd : pending) {
      std::visit([this](auto& c) { apply(c); }, cmd);
    }
  }

  void apply(const HandMove& m) { hand_.command = config_.workspace.clamp(m.position); }
  void apply(const Pause&) { paused_ = true; }
  void apply(const Resume&) { paused_ = false; }
  void apply(const Reset&) { reset_state(); }
  void apply(const SetParam& p)
  {
    if (p.name == "retreat_speed") {
      config_.hand.retreat_speed = std::max(0.0, p.value);
    } else if (p.name == "v_max") {
      config_.controller.v_max = std::max(1e-3, p.value);
    } else if (p.name == "theta_OBS") {
      config_.controller.theta_obs = std::clamp(p.value, 1e-3, kPi - 1e-3);
    }
    safety_.set_params(config_.controller);
  }

  ScenarioConfig config_;
  bool record_;
  MarkerTracker tracker_;
  SafetyMonitor safety_;

  long step_index_ = 0;
  std::size_t goal_index_ = 0;
  bool finished_ = false;
  bool paused_ = false;
  std::optional<double> dwell_elapsed_;

  RobotState robot_;
  FdcmState fdcm_;
  GimbalState gimbal_;
  MarkerAngles angles_;
  HandState hand_;
  SafetySnapshot last_safety_;
  std::optional<Vec3> estimate_;
  double estimate_age_ = 0.0;

  SimTrace trace_;
  LiveState live_;

  std::mutex queue_mutex_;
  std::deque<Command> queue_;
};

inline SimTrace run(const ScenarioConfig& config)
{
  Engine engine(config);
  engine.run_to_end();
  return engine.take_trace();
}

}  // namespace hrc::sim
