#include "mavi/control.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mavi;
using namespace mavi::control;

namespace {

JointConfig with_theta1(double t) {
  JointConfig q;
  q.lift_m = 0.5;
  q.theta_rad[0] = t;
  return q;
}

constexpr std::array<double, 6> kNoTorque{};

}  // namespace

TEST(LocomotionStep, SteadyCommandPassesThrough) {
  ChassisGeometry c;
  ControllerState s;
  s.last_twist = {0.3, -0.1, 0.4};
  const WheelSpeeds w = locomotion_step(s, {0.3, -0.1, 0.4}, 0.01, c);
  EXPECT_EQ(w, locomotion::wheel_speeds_from_twist({0.3, -0.1, 0.4}, c));
}

TEST(LocomotionStep, RampFromRest) {
  // 40 rad/s^2 at r = 0.05 m is 2 m/s^2 of forward body acceleration.
  ChassisGeometry c;
  ControllerState s;
  const WheelSpeeds w = locomotion_step(s, {1.0, 0, 0}, 0.01, c);
  EXPECT_NEAR(s.last_twist.vx_m_s, 0.02, 1e-15);
  EXPECT_EQ(s.last_twist.vy_m_s, 0.0);
  EXPECT_NEAR(locomotion::twist_from_wheel_speeds(w, c).vx_m_s, 0.02, 1e-15);
}

TEST(LocomotionStep, ClampsBeforeConversion) {
  ChassisGeometry c;
  c.max_wheel_accel_rad_s2 = 1e9;
  ControllerState s;
  locomotion_step(s, {5.0, -5.0, 9.0}, 0.01, c);
  EXPECT_EQ(s.last_twist, (BodyTwist{1.0, -1.0, 2.0}));
}

TEST(LocomotionStep, RejectsBadDt) {
  ControllerState s;
  EXPECT_THROW(locomotion_step(s, {}, 0.0, {}), InvalidArgument);
}

TEST(LocomotionStep, WheelAccelerationNeverExceedsBound) {
  ChassisGeometry c;
  ControllerState s;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  const double dt = 0.01;
  WheelSpeeds prev = locomotion::wheel_speeds_from_twist(s.last_twist, c);
  BodyTwist cmd{};
  for (int i = 0; i < 3000; ++i) {
    if (i % 37 == 0) cmd = {u(rng), u(rng), u(rng)};
    const WheelSpeeds w = locomotion_step(s, cmd, dt, c);
    for (std::size_t k = 0; k < 4; ++k)
      ASSERT_LE(std::abs(w[k] - prev[k]), c.max_wheel_accel_rad_s2 * dt * (1 + 1e-12));
    prev = w;
  }
}

TEST(ManipulatorStep, EndpointClampAndMidpoint) {
  const ManipulatorGeometry g;
  ControllerState s;
  s.active_trajectory = JointTrajectory({{0.0, with_theta1(0.0)}, {1.0, with_theta1(1.0)}}, g);
  EXPECT_EQ(manipulator_step(s, -1.0, with_theta1(0), kNoTorque, g).theta_rad[0], 0.0);
  EXPECT_EQ(manipulator_step(s, 0.5, with_theta1(0), kNoTorque, g).theta_rad[0], 0.5);
  EXPECT_EQ(manipulator_step(s, 7.0, with_theta1(0), kNoTorque, g).theta_rad[0], 1.0);
}

TEST(ManipulatorStep, ComplianceYieldsToMeasured) {
  const ManipulatorGeometry g;
  ControllerState s;
  s.hold = with_theta1(1.0);
  std::array<double, 6> torque{};
  torque[1] = 2.0;
  EXPECT_NEAR(manipulator_step(s, 0, with_theta1(0.8), torque, g).theta_rad[0], 0.8, 1e-15);
  // Small torque: partial yield.
  torque[1] = 1.5;
  EXPECT_NEAR(manipulator_step(s, 0, with_theta1(0.5), torque, g).theta_rad[0], 0.85, 1e-15);
  // Below threshold: no yield at all.
  torque[1] = 0.9;
  EXPECT_EQ(manipulator_step(s, 0, with_theta1(0.5), torque, g).theta_rad[0], 1.0);
  // Yield never crosses the measured position in the other direction either.
  s.hold = with_theta1(-1.0);
  torque[1] = -50.0;
  EXPECT_EQ(manipulator_step(s, 0, with_theta1(-0.9), torque, g).theta_rad[0], -0.9);
}

TEST(ManipulatorStep, ZeroTorqueEqualsTrajectoryAndStaysInLimits) {
  const ManipulatorGeometry g;
  JointConfig a = with_theta1(-2.0), b = with_theta1(2.5);
  a.theta_rad[3] = -1.4;
  b.theta_rad[3] = 1.4;
  b.gripper_m = 0.05;
  ControllerState s;
  s.active_trajectory = JointTrajectory({{0.0, a}, {2.0, b}}, g);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(-0.5, 2.5), tq(-30, 30);
  for (int i = 0; i < 500; ++i) {
    const double now = t(rng);
    const JointConfig exact = s.active_trajectory.sample(now);
    EXPECT_EQ(manipulator_step(s, now, a, kNoTorque, g), exact);
    std::array<double, 6> torque;
    for (auto& x : torque) x = tq(rng);
    const JointConfig y = manipulator_step(s, now, b, torque, g);
    EXPECT_TRUE(manipulator::validate_joints(y, g).empty());
  }
}

TEST(JointTrajectory, RejectedAtLoadTime) {
  const ManipulatorGeometry g;
  EXPECT_THROW(JointTrajectory({{0.0, with_theta1(0)}, {0.0, with_theta1(1)}}, g), InvalidArgument);
  JointConfig bad = with_theta1(0);
  bad.theta_rad[3] = 2.0;
  EXPECT_THROW(JointTrajectory({{0.0, bad}}, g), manipulator::JointLimitError);
}

TEST(PlanJointMove, SlowestJointSetsDuration) {
  const ManipulatorGeometry g;
  const JointTrajectory t =
      plan_joint_move(with_theta1(0), with_theta1(1.5), 2.0, {0.2, 1.5, 1.5, 2, 2, 3, 0.1}, 0.1, g);
  ASSERT_EQ(t.knots().size(), 2u);
  EXPECT_DOUBLE_EQ(t.end_time(), 3.0);
}

TEST(PtruStep, EmptyHistoryHoldsLastCommand) {
  ControllerState s;
  s.last_ptru_command = {0.1, 0.2, 0.3};
  EXPECT_EQ(ptru_step(s, ptru::HeadSampleHistory{}, 0.01), (PTRUAngles{0.1, 0.2, 0.3}));
  EXPECT_THROW(ptru_step(s, ptru::HeadSampleHistory{}, 0.0), InvalidArgument);
}

TEST(PtruStep, StaticHeadZeroLatencyIsConversion) {
  ControllerState s;
  s.last_ptru_command = {0.3, -0.2, 0.1};
  ptru::HeadSampleHistory h;
  const auto q = ptru::quaternion_from_ptru_angles({0.3, -0.2, 0.1});
  h.push(0.0, q);
  const PTRUAngles cmd = ptru_step(s, h, 0.01);
  const PTRUAngles direct = ptru::ptru_angles_from_quaternion(q);
  EXPECT_NEAR(cmd.pan_rad, direct.pan_rad, 1e-12);
  EXPECT_NEAR(cmd.tilt_rad, direct.tilt_rad, 1e-12);
  EXPECT_NEAR(cmd.roll_rad, direct.roll_rad, 1e-12);
}

TEST(PtruStep, LatencyLeadsConstantYaw) {
  ControllerState s;
  s.ptru_latency_estimate_s = 0.1;
  s.ptru_limits.rate_limits = {1e6, 1e6, 1e6};
  ptru::HeadSampleHistory h;
  h.push(0.00, ptru::quaternion_from_ptru_angles({0.50, 0, 0}));
  h.push(0.01, ptru::quaternion_from_ptru_angles({0.51, 0, 0}));
  // 1 rad/s for 0.1 s ahead of the latest sample.
  EXPECT_NEAR(ptru_step(s, h, 0.01).pan_rad, 0.61, 1e-9);
}

TEST(PtruStep, RateLimitAndWorkspaceClamp) {
  ControllerState s;
  ptru::HeadSampleHistory h;
  h.push(0.0, ptru::quaternion_from_ptru_angles({1.0, 1.2, 0}));
  const PTRUAngles first = ptru_step(s, h, 0.01);
  EXPECT_NEAR(first.pan_rad, 0.03, 1e-12);
  EXPECT_NEAR(first.tilt_rad, 0.03, 1e-12);
  for (int i = 0; i < 200; ++i) ptru_step(s, h, 0.01);
  EXPECT_NEAR(s.last_ptru_command.pan_rad, 1.0, 1e-9);
  EXPECT_NEAR(s.last_ptru_command.tilt_rad, s.ptru_limits.workspace.tilt.max, 1e-12);
}

TEST(PtruStep, SlowMotionTracksConversion) {
  ControllerState s;
  ptru::HeadSampleHistory h;
  s.last_ptru_command = {0.2, 0.0, 0.0};
  for (int i = 0; i < 300; ++i) {
    const double t = i * 0.01;
    const PTRUAngles truth{0.2 + 0.3 * std::sin(t), 0.2 * std::sin(0.7 * t), 0.1 * std::cos(t) - 0.1};
    const auto q = ptru::quaternion_from_ptru_angles(truth);
    h.push(t, q);
    const PTRUAngles cmd = ptru_step(s, h, 0.01);
    const PTRUAngles direct = ptru::ptru_angles_from_quaternion(q);
    ASSERT_NEAR(cmd.pan_rad, direct.pan_rad, 1e-12) << i;
    ASSERT_NEAR(cmd.tilt_rad, direct.tilt_rad, 1e-12) << i;
    ASSERT_NEAR(cmd.roll_rad, direct.roll_rad, 1e-12) << i;
  }
}
