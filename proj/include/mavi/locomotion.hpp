#pragma once

#include <array>

#include "mavi/common.hpp"

namespace mavi::locomotion {

struct BodyTwist {
  double vx_m_s = 0.0;
  double vy_m_s = 0.0;
  double w_rad_s = 0.0;

  friend bool operator==(const BodyTwist&, const BodyTwist&) = default;
};

/// Wheel angular rates, index 0..3 corresponds to wheels 1..4.
struct WheelSpeeds {
  std::array<double, 4> w_rad_s{};

  double& operator[](std::size_t i) { return w_rad_s[i]; }
  double operator[](std::size_t i) const { return w_rad_s[i]; }
  friend bool operator==(const WheelSpeeds&, const WheelSpeeds&) = default;
};

struct Pose2D {
  double x_m = 0.0;
  double y_m = 0.0;
  double heading_rad = 0.0;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

struct ChassisGeometry {
  double wheel_radius_m = 0.05;
  double half_base_x_m = 0.15;
  double half_base_y_m = 0.15;
  /// Maps commanded wheel rate to the encoder reading of each wheel.
  std::array<int, 4> encoder_sign{+1, -1, +1, -1};
  BodyTwist max_twist{1.0, 1.0, 2.0};
  double max_wheel_accel_rad_s2 = 40.0;

  /// l_x + l_y, the lever arm of the yaw term.
  double lever() const { return half_base_x_m + half_base_y_m; }

  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;
};

/// Inverse kinematics: body twist to wheel rates.
WheelSpeeds wheel_speeds_from_twist(const BodyTwist& twist, const ChassisGeometry& chassis);

/// Least-squares (pseudo-inverse) recovery of the body twist from wheel rates.
BodyTwist twist_from_wheel_speeds(const WheelSpeeds& wheels, const ChassisGeometry& chassis);

/// Multiplies each wheel rate by the chassis encoder sign. Self-inverse.
WheelSpeeds apply_encoder_sign(const WheelSpeeds& wheels, const ChassisGeometry& chassis);

/// Dead-reckons one step from encoder readings using the midpoint-heading rule.
Pose2D integrate_odometry(const Pose2D& pose, const WheelSpeeds& sensed, double dt_s,
                          const ChassisGeometry& chassis);

/// Advances a pose by a body twist held for dt_s (midpoint heading).
Pose2D advance_pose(const Pose2D& pose, const BodyTwist& twist, double dt_s);

BodyTwist clamp_twist(const BodyTwist& twist, const ChassisGeometry& chassis);

}  // namespace mavi::locomotion
