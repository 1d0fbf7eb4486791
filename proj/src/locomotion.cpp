#include "mavi/locomotion.hpp"

#include <string>

namespace mavi::locomotion {

namespace {

void require_finite(const BodyTwist& t) {
  mavi::require_finite(t.vx_m_s, "twist.vx");
  mavi::require_finite(t.vy_m_s, "twist.vy");
  mavi::require_finite(t.w_rad_s, "twist.w");
}

void require_finite(const WheelSpeeds& w) {
  for (double v : w.w_rad_s) mavi::require_finite(v, "wheel speed");
}

}  // namespace

void ChassisGeometry::validate() const {
  if (!(wheel_radius_m > 0.0)) throw InvalidArgument("chassis.wheel_radius_m must be > 0");
  if (!(half_base_x_m > 0.0)) throw InvalidArgument("chassis.half_base_x_m must be > 0");
  if (!(half_base_y_m > 0.0)) throw InvalidArgument("chassis.half_base_y_m must be > 0");
  for (std::size_t i = 0; i < 4; ++i) {
    if (encoder_sign[i] != 1 && encoder_sign[i] != -1)
      throw InvalidArgument("chassis.encoder_sign[" + std::to_string(i) + "] must be +1 or -1");
  }
  if (!(max_twist.vx_m_s >= 0.0) || !(max_twist.vy_m_s >= 0.0) || !(max_twist.w_rad_s >= 0.0))
    throw InvalidArgument("chassis.max_twist components must be >= 0");
  if (!(max_wheel_accel_rad_s2 > 0.0))
    throw InvalidArgument("chassis.max_wheel_accel_rad_s2 must be > 0");
}

// Rows of the wheel map: (1, 1, -L), (-1, 1, -L), (1, -1, -L), (-1, -1, -L), scaled by 1/r.
WheelSpeeds wheel_speeds_from_twist(const BodyTwist& twist, const ChassisGeometry& chassis) {
  require_finite(twist);
  const double inv_r = 1.0 / chassis.wheel_radius_m;
  const double yaw = chassis.lever() * twist.w_rad_s;
  const double vx = twist.vx_m_s;
  const double vy = twist.vy_m_s;
  WheelSpeeds out;
  out[0] = inv_r * (vx + vy - yaw);
  out[1] = inv_r * (-vx + vy - yaw);
  out[2] = inv_r * (vx - vy - yaw);
  out[3] = inv_r * (-vx - vy - yaw);
  return out;
}

// The columns of the wheel map are mutually orthogonal, so the pseudo-inverse is
// the transpose scaled by the reciprocal column norms (4, 4, 4L^2).
BodyTwist twist_from_wheel_speeds(const WheelSpeeds& w, const ChassisGeometry& chassis) {
  require_finite(w);
  const double r = chassis.wheel_radius_m;
  BodyTwist t;
  t.vx_m_s = (r / 4.0) * (w[0] - w[1] + w[2] - w[3]);
  t.vy_m_s = (r / 4.0) * (w[0] + w[1] - w[2] - w[3]);
  t.w_rad_s = -(r / (4.0 * chassis.lever())) * (w[0] + w[1] + w[2] + w[3]);
  return t;
}

WheelSpeeds apply_encoder_sign(const WheelSpeeds& wheels, const ChassisGeometry& chassis) {
  WheelSpeeds out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = chassis.encoder_sign[i] * wheels[i];
  return out;
}

Pose2D advance_pose(const Pose2D& pose, const BodyTwist& twist, double dt_s) {
  const double dtheta = twist.w_rad_s * dt_s;
  const double mid = pose.heading_rad + 0.5 * dtheta;
  const double c = std::cos(mid);
  const double s = std::sin(mid);
  Pose2D out;
  out.x_m = pose.x_m + (c * twist.vx_m_s - s * twist.vy_m_s) * dt_s;
  out.y_m = pose.y_m + (s * twist.vx_m_s + c * twist.vy_m_s) * dt_s;
  out.heading_rad = wrap_angle(pose.heading_rad + dtheta);
  return out;
}

Pose2D integrate_odometry(const Pose2D& pose, const WheelSpeeds& sensed, double dt_s,
                          const ChassisGeometry& chassis) {
  if (!(dt_s > 0.0)) throw InvalidArgument("dt_s must be > 0");
  const BodyTwist twist = twist_from_wheel_speeds(apply_encoder_sign(sensed, chassis), chassis);
  return advance_pose(pose, twist, dt_s);
}

BodyTwist clamp_twist(const BodyTwist& twist, const ChassisGeometry& chassis) {
  return {clamp_abs(twist.vx_m_s, chassis.max_twist.vx_m_s),
          clamp_abs(twist.vy_m_s, chassis.max_twist.vy_m_s),
          clamp_abs(twist.w_rad_s, chassis.max_twist.w_rad_s)};
}

}  // namespace mavi::locomotion
