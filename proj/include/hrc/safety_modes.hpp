#pragma once

#include <cmath>
#include <optional>

#include "hrc/apf_controller.hpp"
#include "hrc/types.hpp"

namespace hrc {

enum class SafetyMode { Mode1 = 1, Mode2 = 2, Mode3 = 3, Mode4 = 4 };

// Which motor buzzes in Mode 2.
enum class HapticSide { Left, Right };

struct SafetySnapshot {
  SafetyMode mode = SafetyMode::Mode1;
  bool vib_left = false;
  bool vib_right = false;
  bool fdcm_requested = false;
  double d_ro = 0.0;
  bool visible = true;
  double timestamp = 0.0;

  bool any_vibration() const { return vib_left || vib_right; }
};

inline bool is_critical(SafetyMode m) { return m == SafetyMode::Mode3 || m == SafetyMode::Mode4; }

inline SafetySnapshot snapshot_for(SafetyMode mode, double d_ro, bool visible, double t, HapticSide side)
{
  SafetySnapshot s;
  s.mode = mode;
  s.d_ro = d_ro;
  s.visible = visible;
  s.timestamp = t;
  switch (mode) {
    case SafetyMode::Mode1:
      break;
    case SafetyMode::Mode2:
      s.vib_left = side == HapticSide::Left;
      s.vib_right = side == HapticSide::Right;
      break;
    case SafetyMode::Mode3:
    case SafetyMode::Mode4:
      s.vib_left = s.vib_right = true;
      s.fdcm_requested = true;
      break;
  }
  return s;
}

/// Distance/visibility to mode. Loss of the marker wins over any distance.
inline SafetySnapshot select_mode(double d_ro, bool visible, const ControllerParams& params,
                                  HapticSide side = HapticSide::Left, double t = 0.0)
{
  SafetyMode mode;
  if (!visible) {
    mode = SafetyMode::Mode4;
  } else if (d_ro < params.d_act) {
    mode = SafetyMode::Mode3;
  } else if (d_ro <= params.d_at) {
    mode = SafetyMode::Mode2;
  } else {
    mode = SafetyMode::Mode1;
  }
  return snapshot_for(mode, d_ro, visible, t, side);
}

/// Mode 2 cue: the motor on the forearm side that faces the TCP. The forearm
/// frame has x along the forearm and y toward its left side.
inline HapticSide facing_side(const Transform& forearm_pose, const Vec3& tcp)
{
  const Vec3 local = forearm_pose.inverse().apply(tcp);
  return local.y() >= 0.0 ? HapticSide::Left : HapticSide::Right;
}

/// Caller-threaded memory for boundary_debounce.
struct DebounceState {
  std::optional<SafetySnapshot> committed;
  SafetyMode pending = SafetyMode::Mode1;
  double pending_since = 0.0;
};

struct DebounceResult {
  SafetySnapshot snapshot;
  DebounceState state;
};

/// Commits a mode change only after the candidate mode has been indicated
/// continuously for `dwell` seconds. Entering Mode 3/4 is immediate, and so is
/// leaving them: that exit is already gated by the d_act/d_dct latch.
inline DebounceResult boundary_debounce(const DebounceState& history, const SafetySnapshot& candidate, double dwell)
{
  DebounceResult out{candidate, history};
  auto& st = out.state;
  if (!history.committed) {
    st.committed = candidate;
    st.pending = candidate.mode;
    st.pending_since = candidate.timestamp;
    return out;
  }
  const SafetySnapshot& current = *history.committed;
  if (candidate.mode != history.pending) {
    st.pending = candidate.mode;
    st.pending_since = candidate.timestamp;
  }
  const bool bypass = is_critical(candidate.mode) || is_critical(current.mode);
  const bool dwelled = candidate.timestamp - st.pending_since >= dwell - 1e-9;
  if (candidate.mode == current.mode || bypass || dwelled) {
    st.committed = candidate;
  } else {
    // Hold the committed mode and its motor pattern; refresh the live readings.
    SafetySnapshot held = current;
    held.d_ro = candidate.d_ro;
    held.visible = candidate.visible;
    held.timestamp = candidate.timestamp;
    st.committed = held;
  }
  out.snapshot = *st.committed;
  return out;
}

/// Per-simulation safety pipeline: raw mode selection, FDCM-consistent
/// latching of Mode 3, and boundary debouncing.
class SafetyMonitor {
 public:
  SafetyMonitor(ControllerParams params, double dwell) : params_(params), dwell_(dwell) {}

  SafetySnapshot update(double d_ro, bool visible, HapticSide side, double t)
  {
    latch_ = fdcm_update(latch_, d_ro, visible, params_);
    SafetySnapshot raw = select_mode(d_ro, visible, params_, side, t);
    if (visible && latch_.active && raw.mode != SafetyMode::Mode3) {
      // Still inside the deactivation band: haptics track the robot's FDCM.
      raw = snapshot_for(SafetyMode::Mode3, d_ro, visible, t, side);
    }
    DebounceResult r = boundary_debounce(state_, raw, dwell_);
    state_ = r.state;
    return r.snapshot;
  }

  void set_params(const ControllerParams& p) { params_ = p; }
  void reset()
  {
    latch_ = {};
    state_ = {};
  }

 private:
  ControllerParams params_;
  double dwell_;
  FdcmState latch_;
  DebounceState state_;
};

}  // namespace hrc
