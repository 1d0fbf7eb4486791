#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mavi/common.hpp"
#include "mavi/locomotion.hpp"
#include "mavi/manipulator.hpp"
#include "mavi/ptru.hpp"
#include "mavi/simworld/geometry.hpp"

namespace mavi::simworld {

using locomotion::BodyTwist;
using locomotion::Pose2D;
using locomotion::WheelSpeeds;
using manipulator::JointConfig;
using ptru::PTRUAngles;
using ptru::Quaternion;

/// Kinematic plant parameters.
struct PlantConfig {
  locomotion::ChassisGeometry chassis;
  double robot_radius_m = 0.21;
  /// First-order lag time constant of joint servos; 0 tracks instantly.
  double joint_time_constant_s = 0.05;
  /// Rate limits: lift (m/s), theta1..5 (rad/s), gripper (m/s).
  std::array<double, 7> joint_rate_limits{0.2, 1.5, 1.5, 2.0, 2.0, 3.0, 0.1};
  double ptru_time_constant_s = 0.02;
  /// Pan, tilt, roll rate limits (rad/s).
  std::array<double, 3> ptru_rate_limits{4.0, 4.0, 4.0};
  double base_gripper_max_m = 0.10;
};

struct RobotState {
  Pose2D pose;
  /// Body twist actually achieved over the last step.
  BodyTwist twist;
  JointConfig joints;
  double base_gripper_m = 0.0;
  PTRUAngles ptru;
};

/// Finite-difference memory for IMU synthesis.
struct MotionHistory {
  double last_dt_s = 0.0;
  Pose2D prev_pose;
  Vec2 velocity;       // world frame, last step
  Vec2 prev_velocity;  // world frame, step before
  Quaternion head;
  Quaternion prev_head;
  std::uint64_t steps = 0;
};

struct World {
  std::vector<Segment> walls;
  RobotState robot;
  PlantConfig plant;
  double clock_s = 0.0;
  std::uint64_t rng_seed = 0;
  NoiseSource rng{0};
  MotionHistory history;
  /// Number of steps in which motion was cut short by contact.
  std::uint64_t contacts = 0;
};

struct Scenario {
  std::vector<Segment> walls;
  Pose2D start;
  std::uint64_t seed = 0;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Line-oriented scenario text: `wall x1 y1 x2 y2`, `start x y heading`, `seed N`, `#`.
Scenario parse_scenario(std::string_view text);
World make_world(const Scenario& scenario, const PlantConfig& plant = {});
World load_scenario(std::string_view text, const PlantConfig& plant = {});

/// Advances the plant by dt_s under wheel, joint and PTRU commands.
void step(World& world, double dt_s, const WheelSpeeds& wheel_cmd, const JointConfig& joint_cmd,
          const PTRUAngles& ptru_cmd, double base_gripper_cmd = 0.0);

/// Head orientation in the world: chassis yaw composed with the PTRU rotation.
Quaternion head_orientation(const RobotState& robot);
Quaternion body_orientation(const RobotState& robot);

/// Smallest distance between the robot disc boundary and any wall (negative on overlap).
double clearance(const World& world);

// ---------------------------------------------------------------- sensors

inline constexpr double kNoReturn = std::numeric_limits<double>::infinity();

struct LidarParams {
  std::size_t beams = 360;
  double angle_min = -kPi;
  double angle_increment = kTwoPi / 360.0;
  double range_min = 0.15;
  double range_max = 12.0;
  double noise_sigma = 0.0;

  double angle_max() const { return angle_min + angle_increment * static_cast<double>(beams - 1); }
};

struct Scan {
  double angle_min = 0.0;
  double angle_max = 0.0;
  double angle_increment = 0.0;
  double range_min = 0.0;
  double range_max = 0.0;
  /// kNoReturn marks no valid return.
  std::vector<double> ranges_m;
  double stamp_s = 0.0;
};

Scan raycast_lidar(World& world, const LidarParams& params);

/// Scan taken from an arbitrary pose, sharing the world's noise stream.
Scan raycast_from(World& world, const Pose2D& pose, const LidarParams& params);

struct SonarPlacement {
  double x_m = 0.0;
  double y_m = 0.0;
  double angle_rad = 0.0;
};

struct SonarParams {
  double range_min = 0.02;
  double range_max = 4.0;
  double noise_sigma = 0.0;
};

inline constexpr std::size_t kSonarCount = 12;

/// Twelve sensors at 30 degree spacing on a ring of the given radius.
std::vector<SonarPlacement> sonar_ring(double radius_m);

std::array<double, kSonarCount> sample_sonar(World& world, std::span<const SonarPlacement> placements,
                                             const SonarParams& params = {});

struct IMUSample {
  Quaternion orientation;
  std::array<double, 3> angular_velocity_rad_s{};
  std::array<double, 3> linear_acceleration_m_s2{};
  double stamp_s = 0.0;
};

enum class ImuMount { Body, Head };

struct ImuNoise {
  double gyro_sigma = 0.0;
  double accel_sigma = 0.0;
};

IMUSample synthesize_imu(World& world, ImuMount mount, const ImuNoise& noise = {});

}  // namespace mavi::simworld
