#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mavi/devicebus.hpp"
#include "mavi/locomotion.hpp"
#include "mavi/manipulator.hpp"
#include "mavi/ptru.hpp"
#include "mavi/simworld/world.hpp"

namespace mavi::teleop {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  /// Dotted field path, e.g. "chassis.wheel_radius_m" or "bus.modules[3].rate_hz".
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PtruConfig {
  ptru::PTRUWorkspace workspace;
  std::array<double, 3> command_rate_limits{3.0, 3.0, 3.0};
  /// Prediction horizon; unset means "match network.delay_s".
  std::optional<double> latency_estimate_s;
  double servo_time_constant_s = 0.02;
  std::array<double, 3> servo_rate_limits{4.0, 4.0, 4.0};
  double mount_height_m = 1.3;
};

struct LidarConfig {
  simworld::LidarParams params;
  int rate_hz = 10;
};

enum class MapPoseSource { Truth, Odometry };

struct MapConfig {
  double resolution_m = 0.05;
  simworld::Vec2 origin{-6.025, -6.025};
  int width = 241;
  int height = 241;
  MapPoseSource pose_source = MapPoseSource::Truth;
};

struct SensorConfig {
  LidarConfig lidar;
  simworld::SonarParams sonar;
  double sonar_ring_radius_m = 0.2;
  simworld::ImuNoise imu;
  MapConfig map;
};

struct LimitsConfig {
  double cmd_vel_timeout_s = 0.5;
  /// Planning speeds for joint moves: lift, theta1..5, gripper.
  std::array<double, 7> joint_speed{0.1, 0.75, 0.75, 1.0, 1.0, 1.5, 0.05};
  double min_move_duration_s = 0.5;
  /// Cells at or above this log-odds block the planner.
  double plan_occupied_log_odds = 0.5;
};

struct NetworkConfig {
  double delay_s = 0.0;
  double jitter_s = 0.0;
  std::uint64_t jitter_seed = 1;
  std::size_t queue_capacity = 1024;
};

/// Telemetry topics with a publication rate in Hz (0 disables, at most 100).
using RateTable = std::map<std::string, int>;
RateTable default_rates();

struct StationConfig {
  locomotion::ChassisGeometry chassis;
  double robot_radius_m = 0.21;
  manipulator::ManipulatorGeometry manipulator;
  double joint_servo_time_constant_s = 0.05;
  std::array<double, 7> joint_servo_rate_limits{0.2, 1.5, 1.5, 2.0, 2.0, 3.0, 0.1};
  double base_gripper_max_m = 0.10;
  PtruConfig ptru;
  devicebus::Registry bus = devicebus::default_registry();
  SensorConfig sensors;
  RateTable rates = default_rates();
  LimitsConfig limits;
  NetworkConfig network;

  double latency_estimate_s() const { return ptru.latency_estimate_s.value_or(network.delay_s); }
  simworld::PlantConfig plant() const;
};

/// Parses a JSON config document. Every section is optional; unknown keys are
/// rejected. Throws ConfigError naming the offending field.
StationConfig parse_config(std::string_view text);
StationConfig load_config_file(const std::string& path);

/// Full effective configuration, every default filled in.
nlohmann::ordered_json config_to_json(const StationConfig& config);
/// Throws ConfigError for semantic violations.
void validate_config(const StationConfig& config);

std::string hex64(std::uint64_t v);
std::string config_hash(const StationConfig& config);
std::string scenario_hash(std::string_view scenario_text);

}  // namespace mavi::teleop
