#include "mavi/simworld/world.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mavi;
using namespace mavi::simworld;

namespace {

const char* kRoom = R"(# 4 x 4 m room centred on the origin
wall -2 -2  2 -2
wall  2 -2  2  2
wall  2  2 -2  2
wall -2  2 -2 -2
start 0 0 0
seed 7
)";

// Oracle: distance from inside an axis-aligned box to its boundary along angle a.
double box_distance(double x, double y, double a, double half) {
  const double c = std::cos(a), s = std::sin(a);
  double t = std::numeric_limits<double>::infinity();
  if (c > 1e-15) t = std::min(t, (half - x) / c);
  if (c < -1e-15) t = std::min(t, (-half - x) / c);
  if (s > 1e-15) t = std::min(t, (half - y) / s);
  if (s < -1e-15) t = std::min(t, (-half - y) / s);
  return t;
}

WheelSpeeds wheels(BodyTwist t, const World& w) {
  return locomotion::wheel_speeds_from_twist(t, w.plant.chassis);
}

LidarParams exact_lidar() {
  LidarParams p;
  p.angle_min = 0.0;
  return p;
}

}  // namespace

TEST(LoadScenario, Room) {
  const World w = load_scenario(kRoom);
  EXPECT_EQ(w.walls.size(), 4u);
  EXPECT_EQ(w.rng_seed, 7u);
  EXPECT_EQ(w.robot.pose, (Pose2D{0, 0, 0}));
}

TEST(LoadScenario, EmptyWorldIsValid) {
  const World w = load_scenario("start 1 2 0.5\n");
  EXPECT_TRUE(w.walls.empty());
  EXPECT_EQ(w.robot.pose.y_m, 2.0);
}

TEST(LoadScenario, ErrorsNameTheLine) {
  auto line_of = [](const char* text) -> std::size_t {
    try {
      load_scenario(text);
    } catch (const ScenarioError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("start 0 0 0\nwall 1 2 3\n"), 2u);
  EXPECT_EQ(line_of("# c\n\nbogus 1\nstart 0 0 0\n"), 3u);
  EXPECT_EQ(line_of("start 0 0 0\nwall 0 0 nan 1\n"), 2u);
  EXPECT_EQ(line_of("start 0 0 0\nwall 0 0 inf 1\n"), 2u);
  EXPECT_EQ(line_of("start 0 0 0\nstart 1 1 1\n"), 2u);
  EXPECT_EQ(line_of("start 0 0 0\nwall 1 1 1 1\n"), 2u);
  EXPECT_NE(line_of("wall 0 0 1 1\n"), 0u);  // missing start
  EXPECT_EQ(line_of("start 0 0 0\nseed -3\n"), 2u);
}

TEST(Step, ZeroCommandsAdvanceOnlyClock) {
  World w = load_scenario(kRoom);
  const RobotState before = w.robot;
  step(w, 0.01, {}, {}, {});
  EXPECT_EQ(w.robot.pose, before.pose);
  EXPECT_EQ(w.robot.joints, before.joints);
  EXPECT_EQ(w.robot.ptru, before.ptru);
  EXPECT_DOUBLE_EQ(w.clock_s, 0.01);
  EXPECT_THROW(step(w, 0.0, {}, {}, {}), InvalidArgument);
}

TEST(Step, ForwardOneSecondOpenWorld) {
  World w = load_scenario("start 0 0 0\n");
  for (int i = 0; i < 100; ++i) step(w, 0.01, wheels({0.2, 0, 0}, w), {}, {});
  EXPECT_NEAR(w.robot.pose.x_m, 0.2, 1e-12);
  EXPECT_NEAR(w.robot.pose.y_m, 0.0, 1e-12);
  EXPECT_NEAR(w.clock_s, 1.0, 1e-12);
  EXPECT_NEAR(w.robot.twist.vx_m_s, 0.2, 1e-12);
}

TEST(Step, StopsAtWallContact) {
  // Disc edge 0.1 m short of a wall at x = 0.31.
  World w = load_scenario("wall 0.31 -1 0.31 1\nstart 0 0 0\n");
  ASSERT_NEAR(clearance(w), 0.1, 1e-12);
  for (int i = 0; i < 100; ++i) step(w, 0.01, wheels({0.2, 0, 0}, w), {}, {});
  EXPECT_NEAR(w.robot.pose.x_m, 0.31 - w.plant.robot_radius_m, 1e-9);
  EXPECT_GE(clearance(w), -1e-9);
  EXPECT_GT(w.contacts, 0u);
  // Backing away is allowed.
  step(w, 0.01, wheels({-0.2, 0, 0}, w), {}, {});
  EXPECT_LT(w.robot.pose.x_m, 0.31 - w.plant.robot_radius_m - 1e-3);
}

TEST(Step, NeverPenetratesWalls) {
  World w = load_scenario(kRoom);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  BodyTwist cmd;
  for (int i = 0; i < 5000; ++i) {
    if (i % 50 == 0) cmd = {u(rng), u(rng), 2 * u(rng)};
    step(w, 0.01, wheels(cmd, w), {}, {});
    ASSERT_GE(clearance(w), -1e-9) << "step " << i;
  }
}

TEST(Step, JointsLagWithRateLimits) {
  World w = load_scenario("start 0 0 0\n");
  JointConfig cmd;
  cmd.theta_rad[0] = 1.0;
  step(w, 0.01, {}, cmd, {0.5, 0, 0});
  EXPECT_GT(w.robot.joints.theta_rad[0], 0.0);
  EXPECT_LE(w.robot.joints.theta_rad[0], w.plant.joint_rate_limits[1] * 0.01 + 1e-15);
  EXPECT_LE(w.robot.ptru.pan_rad, w.plant.ptru_rate_limits[0] * 0.01 + 1e-15);
  for (int i = 0; i < 300; ++i) step(w, 0.01, {}, cmd, {0.5, 0, 0});
  EXPECT_NEAR(w.robot.joints.theta_rad[0], 1.0, 1e-9);
  EXPECT_NEAR(w.robot.ptru.pan_rad, 0.5, 1e-9);
}

TEST(Step, DeterministicForSameSeedAndInputs) {
  auto run = [] {
    World w = load_scenario(kRoom);
    LidarParams lp;
    lp.noise_sigma = 0.01;
    std::vector<double> trace;
    for (int i = 0; i < 200; ++i) {
      step(w, 0.01, wheels({0.3, 0.1, 0.5}, w), {}, {});
      const Scan s = raycast_lidar(w, lp);
      trace.push_back(w.robot.pose.x_m);
      trace.insert(trace.end(), s.ranges_m.begin(), s.ranges_m.begin() + 10);
    }
    return trace;
  };
  EXPECT_EQ(run(), run());
}

TEST(RaycastLidar, RoomExamples) {
  World w = load_scenario(kRoom);
  const Scan s = raycast_lidar(w, exact_lidar());
  ASSERT_EQ(s.ranges_m.size(), 360u);
  EXPECT_NEAR(s.ranges_m[0], 2.0, 1e-12);
  EXPECT_NEAR(s.ranges_m[45], 2.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(s.angle_max, 359.0 * kPi / 180.0, 1e-12);
}

TEST(RaycastLidar, MatchesBoxOracleAndSymmetry) {
  World w = load_scenario("wall -2 -2 2 -2\nwall 2 -2 2 2\nwall 2 2 -2 2\nwall -2 2 -2 -2\nstart 0.3 -0.7 0.4\n");
  const Scan s = raycast_lidar(w, exact_lidar());
  for (std::size_t i = 0; i < s.ranges_m.size(); ++i) {
    const double a = 0.4 + s.angle_increment * static_cast<double>(i);
    EXPECT_NEAR(s.ranges_m[i], box_distance(0.3, -0.7, a, 2.0), 1e-9) << i;
  }
  World c = load_scenario(kRoom);
  const Scan sc = raycast_lidar(c, exact_lidar());
  for (std::size_t i = 0; i + 90 < 360; ++i) EXPECT_NEAR(sc.ranges_m[i], sc.ranges_m[i + 90], 1e-12);
}

TEST(RaycastLidar, OpenWorldAndRangeLimits) {
  World w = load_scenario("start 0 0 0\n");
  for (double r : raycast_lidar(w, {}).ranges_m) EXPECT_EQ(r, kNoReturn);
  World near = load_scenario("wall 0.1 -1 0.1 1\nstart 0 0 0\n");
  EXPECT_EQ(raycast_lidar(near, exact_lidar()).ranges_m[0], kNoReturn);  // below range_min
  LidarParams bad;
  bad.range_min = 5;
  bad.range_max = 1;
  EXPECT_THROW(raycast_lidar(w, bad), InvalidArgument);
}

TEST(SampleSonar, RoomOpenAndErrors) {
  World w = load_scenario(kRoom);
  const auto ring = sonar_ring(0.0);
  const auto r = sample_sonar(w, ring);
  for (std::size_t i = 0; i < kSonarCount; ++i)
    EXPECT_NEAR(r[i], box_distance(0, 0, ring[i].angle_rad, 2.0), 1e-9) << i;
  EXPECT_NEAR(r[0], 2.0, 1e-12);
  EXPECT_NEAR(r[3], 2.0, 1e-12);
  EXPECT_NEAR(r[1], 2.0 / std::cos(kPi / 6), 1e-9);

  const auto mounted = sample_sonar(w, sonar_ring(0.2));
  EXPECT_NEAR(mounted[0], 1.8, 1e-12);

  World open = load_scenario("start 0 0 0\n");
  for (double x : sample_sonar(open, ring)) EXPECT_EQ(x, kNoReturn);
  std::vector<SonarPlacement> eleven(11);
  EXPECT_THROW(sample_sonar(w, eleven), InvalidArgument);
}

TEST(SynthesizeImu, AtRest) {
  World w = load_scenario(kRoom);
  step(w, 0.01, {}, {}, {});
  const IMUSample s = synthesize_imu(w, ImuMount::Body);
  EXPECT_EQ(s.orientation, Quaternion::identity());
  for (double g : s.angular_velocity_rad_s) EXPECT_EQ(g, 0.0);
  for (double a : s.linear_acceleration_m_s2) EXPECT_EQ(a, 0.0);
}

TEST(SynthesizeImu, ConstantSpin) {
  World w = load_scenario("start 0 0 0\n");
  for (int i = 0; i < 500; ++i) {
    step(w, 0.01, wheels({0, 0, 1.0}, w), {}, {});
    const IMUSample s = synthesize_imu(w, ImuMount::Body);
    ASSERT_NEAR(s.angular_velocity_rad_s[2], 1.0, 1e-6) << i;
    ASSERT_NEAR(s.orientation.norm(), 1.0, 1e-12);
  }
  // The head IMU sees the same yaw rate with the PTRU still.
  EXPECT_NEAR(synthesize_imu(w, ImuMount::Head).angular_velocity_rad_s[2], 1.0, 1e-6);
}

TEST(SynthesizeImu, HeadComposesChassisAndPtru) {
  World w = load_scenario("start 0 0 1.5707963267948966\n");
  w.robot.ptru = {kPi / 2, 0, 0};
  const IMUSample s = synthesize_imu(w, ImuMount::Head);
  const double yaw = 2 * std::atan2(s.orientation.z, s.orientation.w);
  EXPECT_NEAR(std::abs(wrap_angle(yaw)), kPi, 1e-9);
  EXPECT_NEAR(std::abs(s.orientation.z), 1.0, 1e-9);
}

TEST(SynthesizeImu, AccelerationInBodyFrame) {
  World w = load_scenario("start 0 0 1.5707963267948966\n");
  // Speed up along body x, which points along world +y.
  for (int i = 0; i < 3; ++i) step(w, 0.01, wheels({0.1 * (i + 1), 0, 0}, w), {}, {});
  const IMUSample s = synthesize_imu(w, ImuMount::Body);
  EXPECT_NEAR(s.linear_acceleration_m_s2[0], 10.0, 1e-9);
  EXPECT_NEAR(s.linear_acceleration_m_s2[1], 0.0, 1e-9);
}

TEST(SynthesizeImu, NoiseIsSeeded) {
  auto sample = [](std::uint64_t seed) {
    World w = load_scenario("start 0 0 0\nseed " + std::to_string(seed) + "\n");
    step(w, 0.01, {}, {}, {});
    return synthesize_imu(w, ImuMount::Body, {0.01, 0.1}).angular_velocity_rad_s;
  };
  EXPECT_EQ(sample(3), sample(3));
  EXPECT_NE(sample(3), sample(4));
}
