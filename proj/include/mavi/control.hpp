#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mavi/locomotion.hpp"
#include "mavi/manipulator.hpp"
#include "mavi/ptru.hpp"

namespace mavi::control {

using locomotion::BodyTwist;
using locomotion::ChassisGeometry;
using locomotion::WheelSpeeds;
using manipulator::JointConfig;
using manipulator::ManipulatorGeometry;
using ptru::PTRUAngles;

struct TrajectoryKnot {
  double time_s = 0.0;
  JointConfig joints;
};

/// Time-stamped joint knots, validated against the geometry on construction.
class JointTrajectory {
 public:
  JointTrajectory() = default;
  /// Throws InvalidArgument for non-increasing times and JointLimitError for
  /// knots outside the limits.
  JointTrajectory(std::vector<TrajectoryKnot> knots, const ManipulatorGeometry& geom);

  bool empty() const { return knots_.empty(); }
  const std::vector<TrajectoryKnot>& knots() const { return knots_; }
  double end_time() const { return knots_.empty() ? 0.0 : knots_.back().time_s; }
  /// Linear interpolation in joint space, clamped to the end knots.
  JointConfig sample(double t) const;

 private:
  std::vector<TrajectoryKnot> knots_;
};

struct Compliance {
  /// Per positioned joint (lift in N/m, revolute in N*m/rad).
  std::array<double, manipulator::kPositionedJoints> stiffness{2000.0, 10.0, 10.0, 10.0, 10.0, 10.0};
  double torque_threshold = 1.0;
};

struct PtruLimits {
  ptru::PTRUWorkspace workspace;
  /// Pan, tilt, roll command rate limits (rad/s).
  std::array<double, 3> rate_limits{3.0, 3.0, 3.0};
};

struct ControllerState {
  BodyTwist last_twist;
  JointTrajectory active_trajectory;
  /// Target held when no trajectory is active.
  JointConfig hold;
  Compliance compliance;
  double ptru_latency_estimate_s = 0.0;
  PTRUAngles last_ptru_command;
  PtruLimits ptru_limits;
};

/// Saturates, rate-limits in wheel space, and converts to wheel rates.
WheelSpeeds locomotion_step(ControllerState& state, const BodyTwist& cmd, double dt_s,
                            const ChassisGeometry& chassis);

/// Trajectory target with compliance yield, passed through the joint limits.
JointConfig manipulator_step(const ControllerState& state, double now_s, const JointConfig& measured,
                             const std::array<double, manipulator::kPositionedJoints>& external_torque,
                             const ManipulatorGeometry& geom);

/// Predicts the head pose over the latency estimate, converts, rate-limits and
/// clamps. Holds the previous command when no head samples exist.
PTRUAngles ptru_step(ControllerState& state, const ptru::HeadSampleHistory& history, double dt_s);

/// Straight joint-space move from `from` to `to` starting at start_s, timed by
/// the slowest joint at the given per-joint speed limits (min_duration_s floor).
JointTrajectory plan_joint_move(const JointConfig& from, const JointConfig& to, double start_s,
                                const std::array<double, 7>& speed_limits, double min_duration_s,
                                const ManipulatorGeometry& geom);

}  // namespace mavi::control
