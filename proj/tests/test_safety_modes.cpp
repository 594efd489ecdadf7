#include <cmath>

#include <gtest/gtest.h>

#include "hrc/safety_modes.hpp"

using namespace hrc;

namespace {

void expect_consistent(const SafetySnapshot& s)
{
  switch (s.mode) {
    case SafetyMode::Mode1:
      EXPECT_FALSE(s.vib_left || s.vib_right);
      EXPECT_FALSE(s.fdcm_requested);
      break;
    case SafetyMode::Mode2:
      EXPECT_NE(s.vib_left, s.vib_right);
      EXPECT_FALSE(s.fdcm_requested);
      break;
    case SafetyMode::Mode3:
    case SafetyMode::Mode4:
      EXPECT_TRUE(s.vib_left && s.vib_right);
      EXPECT_TRUE(s.fdcm_requested);
      break;
  }
}

}  // namespace

TEST(SelectMode, Examples)
{
  const ControllerParams p;
  auto s = select_mode(0.40, true, p);
  EXPECT_EQ(s.mode, SafetyMode::Mode1);
  EXPECT_FALSE(s.any_vibration());
  s = select_mode(0.20, true, p);
  EXPECT_EQ(s.mode, SafetyMode::Mode2);
  EXPECT_EQ(int(s.vib_left) + int(s.vib_right), 1);
  s = select_mode(0.05, true, p);
  EXPECT_EQ(s.mode, SafetyMode::Mode3);
  s = select_mode(0.50, false, p);
  EXPECT_EQ(s.mode, SafetyMode::Mode4);
  EXPECT_TRUE(s.vib_left && s.vib_right && s.fdcm_requested);
}

TEST(SelectMode, BoundariesBelongToMode2)
{
  const ControllerParams p;
  EXPECT_EQ(select_mode(p.d_act, true, p).mode, SafetyMode::Mode2);
  EXPECT_EQ(select_mode(p.d_at, true, p).mode, SafetyMode::Mode2);
}

TEST(SelectMode, ExhaustiveSweepIsConsistent)
{
  const ControllerParams p;
  for (int mm = 0; mm <= 1000; ++mm) {
    const double d = mm * 0.001;
    for (bool visible : {true, false}) {
      for (HapticSide side : {HapticSide::Left, HapticSide::Right}) {
        const auto s = select_mode(d, visible, p, side);
        expect_consistent(s);
        if (!visible) {
          ASSERT_EQ(s.mode, SafetyMode::Mode4);
        } else if (d > p.d_at) {
          ASSERT_EQ(s.mode, SafetyMode::Mode1);
        } else if (d >= p.d_act) {
          ASSERT_EQ(s.mode, SafetyMode::Mode2);
          ASSERT_EQ(s.vib_left, side == HapticSide::Left);
        } else {
          ASSERT_EQ(s.mode, SafetyMode::Mode3);
        }
      }
    }
  }
}

TEST(FacingSide, DependsOnTcpSide)
{
  const Transform forearm = Transform::identity();
  EXPECT_EQ(facing_side(forearm, Vec3(0.3, 0.2, 0)), HapticSide::Left);
  EXPECT_EQ(facing_side(forearm, Vec3(0.3, -0.2, 0)), HapticSide::Right);
  EXPECT_EQ(facing_side(Transform::rot_z(kPi), Vec3(0.3, -0.2, 0)), HapticSide::Left);
}

TEST(Debounce, OscillationAcrossThresholdHolds)
{
  const ControllerParams p;
  DebounceState st;
  // 50 Hz flip between 0.29 m and 0.31 m for 2 s, sampled at 100 Hz.
  for (int k = 0; k < 200; ++k) {
    const double t = k * 0.01;
    const double d = k % 2 == 0 ? 0.31 : 0.29;
    const auto r = boundary_debounce(st, select_mode(d, true, p, HapticSide::Left, t), 0.1);
    st = r.state;
    ASSERT_EQ(r.snapshot.mode, SafetyMode::Mode1) << "t = " << t;
  }
}

TEST(Debounce, SustainedChangeCommits)
{
  const ControllerParams p;
  DebounceState st;
  st = boundary_debounce(st, select_mode(0.4, true, p, HapticSide::Left, 0.0), 0.1).state;
  SafetyMode mode = SafetyMode::Mode1;
  double changed_at = -1.0;
  for (int k = 1; k <= 20; ++k) {
    const double t = k * 0.01;
    const auto r = boundary_debounce(st, select_mode(0.2, true, p, HapticSide::Left, t), 0.1);
    st = r.state;
    if (r.snapshot.mode != mode && changed_at < 0) changed_at = t;
    mode = r.snapshot.mode;
  }
  EXPECT_EQ(mode, SafetyMode::Mode2);
  EXPECT_NEAR(changed_at, 0.11, 1e-9);
}

TEST(Debounce, EscalationBypassesDwell)
{
  const ControllerParams p;
  DebounceState st;
  st = boundary_debounce(st, select_mode(0.4, true, p, HapticSide::Left, 0.0), 0.1).state;
  auto r = boundary_debounce(st, select_mode(0.05, true, p, HapticSide::Left, 0.01), 0.1);
  EXPECT_EQ(r.snapshot.mode, SafetyMode::Mode3);
  r = boundary_debounce(r.state, select_mode(0.4, false, p, HapticSide::Left, 0.02), 0.1);
  EXPECT_EQ(r.snapshot.mode, SafetyMode::Mode4);
}

TEST(SafetyMonitor, Mode4DominatesHistory)
{
  const ControllerParams p;
  SafetyMonitor mon(p, 0.1);
  double t = 0.0;
  for (double d : {0.5, 0.25, 0.05, 0.12, 0.4}) {
    for (int k = 0; k < 30; ++k, t += 0.01) {
      mon.update(d, true, HapticSide::Left, t);
    }
    const auto s = mon.update(d, false, HapticSide::Left, t);
    EXPECT_EQ(s.mode, SafetyMode::Mode4) << "after d = " << d;
    expect_consistent(s);
    t += 0.01;
  }
}

TEST(SafetyMonitor, Mode3LatchesLikeFdcm)
{
  const ControllerParams p;
  SafetyMonitor mon(p, 0.1);
  EXPECT_EQ(mon.update(0.05, true, HapticSide::Left, 0.0).mode, SafetyMode::Mode3);
  // Inside the deactivation band the robot is still halted, so haptics stay on.
  EXPECT_EQ(mon.update(0.12, true, HapticSide::Left, 0.01).mode, SafetyMode::Mode3);
  // Leaving the latch drops out of Mode 3 at once.
  EXPECT_EQ(mon.update(0.20, true, HapticSide::Left, 0.02).mode, SafetyMode::Mode2);
}

TEST(SafetyMonitor, EscalationWithinOneStep)
{
  const ControllerParams p;
  SafetyMonitor mon(p, 0.1);
  double t = 0.0;
  for (int k = 0; k < 50; ++k, t += 0.01) mon.update(0.2, true, HapticSide::Right, t);
  EXPECT_EQ(mon.update(0.099, true, HapticSide::Right, t).mode, SafetyMode::Mode3);
}

TEST(SafetyMonitor, SweepKeepsInvariants)
{
  const ControllerParams p;
  SafetyMonitor mon(p, 0.1);
  double t = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    for (int mm = 0; mm <= 1000; ++mm, t += 0.01) {
      const double d = pass == 0 ? mm * 0.001 : 1.0 - mm * 0.001;
      for (bool visible : {true, false}) {
        const auto s = mon.update(d, visible, HapticSide::Left, t);
        expect_consistent(s);
        if (!visible) ASSERT_EQ(s.mode, SafetyMode::Mode4);
      }
    }
  }
}
