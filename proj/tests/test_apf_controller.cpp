#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrc/apf_controller.hpp"

using namespace hrc;

namespace {

Vec6 initial_q()
{
  Vec6 q;
  q << deg2rad(-20), deg2rad(-110), deg2rad(-100), deg2rad(-60), deg2rad(90), 0.0;
  return q;
}

// Robot at the default start pose moving with the given TCP velocity.
RobotState moving_robot(const ArmModel& model, const Vec3& v_tcp)
{
  JointState js;
  js.q = initial_q();
  js.qdot = solve_joint_rates(jacobian(model, js.q), linear_twist(v_tcp), 0.0,
                              Vec6::Constant(std::numeric_limits<double>::infinity()));
  return make_robot_state(model, js);
}

Vec3 random_unit(std::mt19937_64& rng)
{
  std::normal_distribution<double> g;
  return Vec3(g(rng), g(rng), g(rng)).normalized();
}

}  // namespace

TEST(PositionController, ConvergedGivesZero)
{
  const ControllerParams p;
  GoalSpec goal;
  goal.position = Vec3(0.5, 0.1, 0.3);
  const auto out = position_controller(p, goal.position, goal, Mat6::Identity(), 0.0);
  EXPECT_EQ(out.v_pc, Vec3::Zero());
  EXPECT_EQ(out.qdot, Vec6::Zero());
}

TEST(PositionController, SaturatesAtGain)
{
  const ControllerParams p;
  GoalSpec goal;
  goal.position = Vec3(1, 0, 0);
  const auto out = position_controller(p, Vec3::Zero(), goal, Mat6::Identity(), 0.0);
  EXPECT_NEAR(out.v_pc.x(), 0.2 * std::tanh(10.0), 1e-12);
  EXPECT_NEAR(out.v_pc.x(), 0.2, 1e-6);
  EXPECT_EQ(out.v_pc.y(), 0.0);
  EXPECT_NEAR(out.qdot[0], out.v_pc.x(), 1e-12);
}

TEST(PositionController, LinearRegimeForSmallError)
{
  const ControllerParams p;
  GoalSpec goal;
  goal.position = Vec3(0.001, 0, 0);
  const auto out = position_controller(p, Vec3::Zero(), goal, Mat6::Identity(), 0.0);
  EXPECT_NEAR(out.v_pc.x(), 0.002, 0.002 * 0.01);
}

TEST(PositionController, TanhIsPerComponent)
{
  const ControllerParams p;
  GoalSpec goal;
  goal.position = Vec3(0.01, -0.02, 0.0);
  const auto out = position_controller(p, Vec3::Zero(), goal, Mat6::Identity(), 0.0);
  EXPECT_NEAR(out.v_pc.x(), 0.2 * std::tanh(0.1), 1e-15);
  EXPECT_NEAR(out.v_pc.y(), 0.2 * std::tanh(-0.2), 1e-15);
}

TEST(ClassifyObstacle, HeadOnReceding)
{
  const double th = deg2rad(45);
  auto c = classify_obstacle(Vec3(1, 0, 0), Vec3::Zero(), Vec3(1, 0, 0), th);
  EXPECT_EQ(c.type, ObstacleType::Type1);
  EXPECT_NEAR(c.theta_c, 0.0, 1e-12);
  c = classify_obstacle(Vec3(1, 0, 0), Vec3::Zero(), Vec3(-1, 0, 0), th);
  EXPECT_EQ(c.type, ObstacleType::Type2);
  EXPECT_NEAR(c.theta_c, kPi, 1e-12);
}

TEST(ClassifyObstacle, BoundaryIsType1)
{
  const Vec3 v(1, 0, 0);
  const Vec3 r(std::cos(0.7), std::sin(0.7), 0.0);
  const auto c = classify_obstacle(v, Vec3::Zero(), r, classify_obstacle(v, Vec3::Zero(), r, 1.0).theta_c);
  EXPECT_EQ(c.type, ObstacleType::Type1);
}

TEST(ClassifyObstacle, StationaryTcpIsType1AndFlagged)
{
  const auto c = classify_obstacle(Vec3::Zero(), Vec3::Zero(), Vec3(-1, 0, 0), deg2rad(10));
  EXPECT_EQ(c.type, ObstacleType::Type1);
  EXPECT_TRUE(c.stationary_tcp);
}

TEST(RepulsiveType1, CollinearIsPureNormal)
{
  const ControllerParams p;
  const Vec3 v = repulsive_velocity_type1(p, Vec3::Zero(), Vec3(0.2, 0, 0), Vec3(0.1, 0, 0), Vec3(1, 0, 0));
  EXPECT_LT((v - p.rep_gain * Vec3(-1, 0, 0)).norm(), 1e-12);
}

TEST(RepulsiveType1, MatchesFormulaEvaluation)
{
  const ControllerParams p;
  const Vec3 x_r(0, 0, 0), x_o(0, 0.2, 0), v(0.1, 0, 0), x_g(0.5, 0.3, 0.1);
  // Evaluated by hand: n = (0,-1,0), t = (1,0,0), g = unit((0.5,0,0.1)).
  const Vec3 n(0, -1, 0), t(1, 0, 0);
  const Vec3 g = Vec3(0.5, 0, 0.1) / std::sqrt(0.26);
  const Vec3 expected = p.rep_gain * (n + t + g) / (n + t + g).norm();
  EXPECT_LT((repulsive_velocity_type1(p, x_r, x_o, v, x_g) - expected).norm(), 1e-12);
}

TEST(RepulsiveType1, MagnitudeIsRepGain)
{
  const ControllerParams p;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x_r = random_unit(rng), x_o = x_r + 0.2 * random_unit(rng);
    const Vec3 v = 0.1 * random_unit(rng), x_g = random_unit(rng);
    EXPECT_NEAR(repulsive_velocity_type1(p, x_r, x_o, v, x_g).norm(), p.rep_gain, 1e-12);
  }
}

TEST(RepulsiveType2, NormalOnly)
{
  const ControllerParams p;
  EXPECT_LT((repulsive_velocity_type2(p, Vec3::Zero(), Vec3(0, 0.15, 0)) - p.rep_gain * Vec3(0, -1, 0)).norm(), 1e-15);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x_r = random_unit(rng), r = 0.3 * random_unit(rng);
    const Vec3 v = repulsive_velocity_type2(p, x_r, x_r + r);
    EXPECT_NEAR(v.norm(), p.rep_gain, 1e-12);
    EXPECT_NEAR(v.dot(r) / (v.norm() * r.norm()), -1.0, 1e-12);
  }
}

TEST(Repulsive, CoincidentThrows)
{
  const ControllerParams p;
  EXPECT_THROW(repulsive_velocity_type1(p, Vec3::Ones(), Vec3::Ones(), Vec3::UnitX(), Vec3::Zero()), CoincidentObstacle);
  EXPECT_THROW(repulsive_velocity_type2(p, Vec3::Ones(), Vec3::Ones()), CoincidentObstacle);
}

TEST(Blend, Endpoints)
{
  const Vec3 pc(0.1, 0, 0), rep(0, 0.2, 0);
  EXPECT_EQ(blend(pc, rep, 15.0, 0.0), rep);
  const Vec3 far = blend(pc, rep, 10.0, 5.0);  // tau*d = 50
  EXPECT_LT((far - pc).norm() / pc.norm(), 1e-20);
}

TEST(Blend, HalfWeight)
{
  const Vec3 pc(0.1, 0, 0), rep(0, 0.2, 0);
  const double d = std::log(2.0) / 10.0;
  EXPECT_NEAR(blend_weight(10.0, d), 0.5, 1e-15);
  EXPECT_LT((blend(pc, rep, 10.0, d) - 0.5 * (pc + rep)).norm(), 1e-15);
}

TEST(Blend, WeightStrictlyDecreasing)
{
  double prev = blend_weight(15.0, 0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double w = blend_weight(15.0, i * 0.001);
    ASSERT_LT(w, prev);
    prev = w;
  }
}

TEST(Fdcm, Examples)
{
  ControllerParams p;
  EXPECT_TRUE(fdcm_update({false}, 0.08, true, p).active);
  EXPECT_TRUE(fdcm_update({true}, 0.12, true, p).active);
  EXPECT_FALSE(fdcm_update({true}, 0.16, true, p).active);
  EXPECT_FALSE(fdcm_update({false}, 0.12, true, p).active);
  EXPECT_TRUE(fdcm_update({false}, 0.5, false, p).active);
  EXPECT_TRUE(fdcm_update({true}, 0.5, false, p).active);
}

TEST(Fdcm, NoChatterInsideBand)
{
  const ControllerParams p;
  const double mid = 0.5 * (p.d_act + p.d_dct);
  const double amp = 0.49 * (p.d_dct - p.d_act);
  for (bool start : {false, true}) {
    FdcmState s{start};
    for (int i = 0; i < 10000; ++i) {
      s = fdcm_update(s, mid + amp * std::sin(0.01 * i), true, p);
      ASSERT_EQ(s.active, start);
    }
  }
}

TEST(Step, FarObstacleIsPositionControl)
{
  const ControllerParams p;
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.1, 0, 0));
  GoalSpec goal;
  goal.position = robot.tcp_position() + Vec3(0.3, 0.1, 0);
  ObstacleState o;
  o.position = robot.tcp_position() + Vec3(0, 0.40, 0);
  const auto d = step(p, m, robot, goal, o, {});
  EXPECT_EQ(d.control_case, ControlCase::NoAvoidance);
  EXPECT_EQ(d.blend_weight, 0.0);
  const auto pc = position_controller(p, robot.tcp_position(), goal, jacobian(m, robot.joints.q), p.damping, m.rate_caps);
  EXPECT_LT((d.tcp_velocity_cmd - pc.v_pc).norm(), 1e-15);
}

TEST(Step, HeadOnApproachIsType1Blend)
{
  const ControllerParams p;
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.1, 0, 0));
  GoalSpec goal;
  goal.position = robot.tcp_position() + Vec3(0.5, 0, 0);
  ObstacleState o;
  o.position = robot.tcp_position() + Vec3(0.20, 0.01, 0);
  const auto d = step(p, m, robot, goal, o, {});
  EXPECT_EQ(d.control_case, ControlCase::AvoidType1);
  EXPECT_NEAR(d.blend_weight, std::exp(-p.tau * d.d_ro), 1e-15);
  const Vec3 x_r = robot.tcp_position();
  const auto pc = position_controller(p, x_r, goal, jacobian(m, robot.joints.q), p.damping, m.rate_caps);
  const Vec3 rep = repulsive_velocity_type1(p, x_r, o.position, robot.tcp_velocity(), goal.position);
  const double w = std::exp(-p.tau * d.d_ro);
  const Vec3 expected = cap_speed((1.0 - w) * pc.v_pc + w * rep, p.v_max);
  EXPECT_LT((d.tcp_velocity_cmd - expected).norm(), 1e-12);
}

TEST(Step, CloseObstacleStopsRobot)
{
  const ControllerParams p;
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.1, 0, 0));
  GoalSpec goal;
  goal.position = robot.tcp_position() + Vec3(0.5, 0, 0);
  ObstacleState o;
  o.position = robot.tcp_position() + Vec3(0.0, 0.08, 0);
  const auto d = step(p, m, robot, goal, o, {});
  EXPECT_EQ(d.control_case, ControlCase::Fdcm);
  EXPECT_EQ(d.qdot_cmd, Vec6::Zero());
  EXPECT_TRUE(d.fdcm.active);
}

TEST(Step, HiddenMarkerStopsRobot)
{
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.1, 0, 0));
  ObstacleState o;
  o.position = robot.tcp_position() + Vec3(0.0, 0.5, 0);
  o.visible = false;
  o.age = 0.01;
  const auto d = step(ControllerParams{}, m, robot, GoalSpec{robot.tcp_position() + Vec3(0.3, 0, 0), Vec3::Zero()}, o, {});
  EXPECT_EQ(d.control_case, ControlCase::Fdcm);
}

TEST(Step, CoincidentForcesFdcm)
{
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.1, 0, 0));
  ObstacleState o;
  o.position = robot.tcp_position();
  const auto d = step(ControllerParams{}, m, robot, GoalSpec{}, o, {});
  EXPECT_TRUE(d.coincident);
  EXPECT_EQ(d.control_case, ControlCase::Fdcm);
}

TEST(Step, ContinuousAcrossAvoidanceThreshold)
{
  const ControllerParams p;
  ASSERT_GE(p.tau * p.d_at, 3.0);
  const ArmModel m = ur10_model();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const RobotState robot = moving_robot(m, 0.15 * random_unit(rng));
    GoalSpec goal;
    goal.position = robot.tcp_position() + 0.4 * random_unit(rng);
    const Vec3 dir = random_unit(rng);
    ObstacleState in, out;
    in.position = robot.tcp_position() + (p.d_at - 1e-6) * dir;
    out.position = robot.tcp_position() + (p.d_at + 1e-6) * dir;
    const auto a = step(p, m, robot, goal, in, {});
    const auto b = step(p, m, robot, goal, out, {});
    ASSERT_NE(a.control_case, ControlCase::NoAvoidance);
    ASSERT_EQ(b.control_case, ControlCase::NoAvoidance);
    const double jump = (a.tcp_velocity_cmd - b.tcp_velocity_cmd).norm();
    // The blended and unblended commands differ by w * |v_rep - v_pc|.
    EXPECT_LE(jump, std::exp(-p.tau * p.d_at) * (p.rep_gain + p.v_max) + 1e-6);
    EXPECT_LT(jump, 0.05 * p.rep_gain);
  }
}

TEST(Step, SpeedCapHolds)
{
  const ControllerParams p;
  const ArmModel m = ur10_model();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(0.0, 0.6);
  for (int i = 0; i < 10000; ++i) {
    const RobotState robot = moving_robot(m, 0.3 * random_unit(rng));
    GoalSpec goal;
    goal.position = robot.tcp_position() + 2.0 * random_unit(rng);
    goal.velocity = 0.5 * random_unit(rng);
    ObstacleState o;
    o.position = robot.tcp_position() + dist(rng) * random_unit(rng);
    const auto d = step(p, m, robot, goal, o, {});
    ASSERT_LE(d.tcp_velocity_cmd.norm(), p.v_max * (1.0 + 1e-12));
    if (d.control_case == ControlCase::Fdcm) {
      ASSERT_TRUE(d.qdot_cmd.isZero(0.0));
    }
  }
}

TEST(Step, PureFunction)
{
  const ControllerParams p;
  const ArmModel m = ur10_model();
  const RobotState robot = moving_robot(m, Vec3(0.05, 0.1, 0));
  GoalSpec goal{robot.tcp_position() + Vec3(0.2, 0.3, 0), Vec3::Zero()};
  ObstacleState o;
  o.position = robot.tcp_position() + Vec3(0.1, 0.12, 0.05);
  const auto a = step(p, m, robot, goal, o, {});
  const auto b = step(p, m, robot, goal, o, {});
  EXPECT_EQ(a.qdot_cmd, b.qdot_cmd);
  EXPECT_EQ(a.tcp_velocity_cmd, b.tcp_velocity_cmd);
}

TEST(ControlJacobian, PositionalModeDropsAngularRows)
{
  ControllerParams p;
  p.hold_orientation = false;
  const ArmModel m = ur10_model();
  const Mat6 j = control_jacobian(p, m, initial_q());
  EXPECT_TRUE(j.bottomRows<3>().isZero(0.0));
  EXPECT_EQ(j.topRows<3>(), jacobian(m, initial_q()).topRows<3>());
}

TEST(ControllerParams, ValidateRejectsBadBand)
{
  ControllerParams p;
  p.d_dct = 0.05;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.theta_obs = kPi;
  EXPECT_THROW(p.validate(), DomainError);
}
