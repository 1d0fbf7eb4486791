#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "mavi/common.hpp"

namespace mavi::manipulator {

inline constexpr std::size_t kRevoluteJoints = 5;
/// Positioned joints: lift followed by the five revolute joints.
inline constexpr std::size_t kPositionedJoints = 1 + kRevoluteJoints;

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
};

struct ManipulatorGeometry {
  /// l0..l5: base offset, two planar links, wrist offset, two wrist links.
  std::array<double, 6> link_lengths_m{0.10, 0.20, 0.20, 0.05, 0.10, 0.10};
  Range lift_range_m{0.20, 1.20};
  std::array<Range, kRevoluteJoints> joint_limits_rad{
      Range{-kPi, kPi}, Range{-2.9, 2.9}, Range{-kPi, kPi}, Range{-1.5, 1.5}, Range{-kPi, kPi}};
  double gripper_max_m = 0.08;
  double payload_limit_kg = 1.0;
  /// Fixed vertical offset between the lift origin and the base plane.
  double z_offset_m = 0.0;

  double l(std::size_t i) const { return link_lengths_m[i]; }
  /// Distance of the wrist tip from the planar-chain end at a given pitch.
  double wrist_reach(double pitch) const { return l(3) + (l(4) + l(5)) * std::cos(pitch); }

  void validate() const;
};

struct JointConfig {
  double lift_m = 0.0;
  std::array<double, kRevoluteJoints> theta_rad{};
  double gripper_m = 0.0;

  /// Positioned joint i, where 0 is the lift and 1..5 the revolute joints.
  double joint(std::size_t i) const { return i == 0 ? lift_m : theta_rad[i - 1]; }
  double& joint(std::size_t i) { return i == 0 ? lift_m : theta_rad[i - 1]; }

  friend bool operator==(const JointConfig&, const JointConfig&) = default;
};

struct EEPose {
  double x_m = 0.0;
  double y_m = 0.0;
  double z_m = 0.0;
  double pitch_rad = 0.0;
  double planar_heading_rad = 0.0;
  double roll_rad = 0.0;

  friend bool operator==(const EEPose&, const EEPose&) = default;
};

struct LimitViolation {
  /// 0 = lift, 1..5 = revolute joints, 6 = gripper.
  std::size_t joint = 0;
  double value = 0.0;
  Range bound;
};

using ValidityReport = std::vector<LimitViolation>;

std::string joint_name(std::size_t joint);

class UnreachablePose : public std::runtime_error {
 public:
  UnreachablePose(std::string quantity, double value);
  const std::string& quantity() const { return quantity_; }
  double value() const { return value_; }

 private:
  std::string quantity_;
  double value_;
};

class JointLimitError : public std::runtime_error {
 public:
  explicit JointLimitError(ValidityReport violations);
  const ValidityReport& violations() const { return violations_; }

 private:
  ValidityReport violations_;
};

/// Tolerance on acos arguments before a pose is declared unreachable.
inline constexpr double kAcosSlack = 1e-12;

EEPose forward_kinematics(const JointConfig& joints, const ManipulatorGeometry& geom);

/// Closed-form IK on the elbow-positive branch (theta2 in [0, pi]). The returned
/// gripper width is zero; it is commanded separately.
JointConfig solve_ik(const EEPose& pose, const ManipulatorGeometry& geom);

ValidityReport validate_joints(const JointConfig& joints, const ManipulatorGeometry& geom);

double gripper_target(double width_m, const ManipulatorGeometry& geom);

}  // namespace mavi::manipulator
