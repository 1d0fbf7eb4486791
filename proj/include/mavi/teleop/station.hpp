#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "mavi/control.hpp"
#include "mavi/devicebus.hpp"
#include "mavi/simworld/grid.hpp"
#include "mavi/simworld/world.hpp"
#include "mavi/teleop/config.hpp"
#include "mavi/teleop/envelope.hpp"

namespace mavi::teleop {

inline constexpr std::int64_t kTickUs = 10'000;
inline constexpr int kTickHz = 100;

/// True on the ticks (1-based) where a topic at rate_hz publishes: spreads
/// rate_hz events evenly over every 100 ticks.
bool due_on_tick(std::uint64_t tick, int rate_hz);

/// Ingress delay model: delivery = ingress + delay + uniform jitter, never
/// reordering a topic.
class LatencyModel {
 public:
  /// Throws InvalidArgument for negative delay or jitter.
  LatencyModel(double delay_s, double jitter_s, std::uint64_t seed);

  std::int64_t delivery_us(const std::string& topic, std::int64_t ingress_us);
  double delay_s() const { return delay_s_; }

 private:
  double delay_s_;
  double jitter_s_;
  NoiseSource rng_;
  std::map<std::string, std::int64_t> last_;
};

/// The robot-side station: owns the simulated world, controllers, device bus
/// and map, and turns inbound command envelopes into outbound telemetry on a
/// fixed 100 Hz virtual tick.
class Station {
 public:
  using Sink = std::function<void(const Envelope&)>;

  Station(StationConfig config, const simworld::Scenario& scenario);

  void set_sink(Sink sink) { sink_ = std::move(sink); }

  /// Stamps the envelope with the current virtual time and queues it for
  /// delivery. Returns the canonical stamped form.
  Envelope submit(Envelope inbound);

  /// Advances one 10 ms tick.
  void tick();
  void run_ticks(std::uint64_t n);

  std::uint64_t ticks() const { return tick_; }
  std::int64_t now_us() const { return now_us_; }
  double now_s() const { return static_cast<double>(now_us_) / 1e6; }

  const StationConfig& config() const { return config_; }
  const simworld::World& world() const { return world_; }
  const control::ControllerState& controller() const { return ctrl_; }
  const ptru::HeadSampleHistory& head_history() const { return head_; }
  const simworld::OccupancyGrid& map() const { return map_; }
  const locomotion::Pose2D& odometry() const { return odom_; }
  const devicebus::CycleReport& last_cycle() const { return last_cycle_; }
  const devicebus::DeviceCommunicationManager& bus() const { return dcm_; }
  std::uint64_t published(const std::string& topic) const;
  std::size_t pending_inbound() const { return inbound_.size(); }
  /// Inbound envelopes handed to the controllers so far.
  std::uint64_t delivered() const { return delivered_; }

  /// Publishes on `error` (used by transports for undecodable input too).
  void report_error(const std::string& code, const std::string& message, const std::string& topic = {},
                    std::optional<std::uint64_t> seq = std::nullopt);

 private:
  void deliver(const Envelope& e);
  void handle_ee_pose(const Envelope& e, bool preview);
  void handle_joint_traj(const Envelope& e);
  void handle_head(const Envelope& e);
  void handle_gripper(const Envelope& e);
  void handle_goal(const Envelope& e);

  void write_statuses();
  void run_controllers();
  void apply_plant();
  void sample_sensors();
  void publish_telemetry();
  void publish(const std::string& topic, Json payload);

  manipulator::JointConfig measured_joints() const;

  StationConfig config_;
  simworld::World world_;
  control::ControllerState ctrl_;
  ptru::HeadSampleHistory head_;
  ptru::StereoBaseline baseline_;
  devicebus::DeviceCommunicationManager dcm_;
  std::map<std::uint8_t, std::shared_ptr<devicebus::EmulatedDevice>> devices_;
  devicebus::CycleReport last_cycle_;
  simworld::OccupancyGrid map_;
  std::vector<std::uint8_t> published_map_;
  std::vector<simworld::SonarPlacement> sonar_ring_;
  simworld::Scan last_scan_;
  bool have_scan_ = false;
  locomotion::Pose2D odom_;
  LatencyModel latency_;

  std::multimap<std::int64_t, Envelope> inbound_;
  std::uint64_t delivered_ = 0;

  locomotion::BodyTwist cmd_twist_;
  std::int64_t cmd_twist_us_ = 0;
  bool cmd_twist_live_ = false;
  double arm_gripper_cmd_ = 0.0;
  double base_gripper_cmd_ = 0.0;
  locomotion::WheelSpeeds wheel_cmd_;
  manipulator::JointConfig joint_cmd_;
  ptru::PTRUAngles ptru_cmd_;

  std::uint64_t tick_ = 0;
  std::int64_t now_us_ = 0;
  std::map<std::string, std::uint64_t> seq_;
  Sink sink_;
};

}  // namespace mavi::teleop
