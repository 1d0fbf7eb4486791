#include "mavi/control.hpp"

#include <algorithm>

namespace mavi::control {

JointTrajectory::JointTrajectory(std::vector<TrajectoryKnot> knots, const ManipulatorGeometry& geom)
    : knots_(std::move(knots)) {
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require_finite(knots_[i].time_s, "trajectory knot time");
    if (i > 0 && !(knots_[i].time_s > knots_[i - 1].time_s))
      throw InvalidArgument("trajectory knot times must be strictly increasing");
    if (auto report = manipulator::validate_joints(knots_[i].joints, geom); !report.empty())
      throw manipulator::JointLimitError(std::move(report));
  }
}

JointConfig JointTrajectory::sample(double t) const {
  if (knots_.empty()) throw InvalidArgument("sample on empty trajectory");
  if (t <= knots_.front().time_s) return knots_.front().joints;
  if (t >= knots_.back().time_s) return knots_.back().joints;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const TrajectoryKnot& k) { return v < k.time_s; });
  const TrajectoryKnot& b = *it;
  const TrajectoryKnot& a = *(it - 1);
  const double u = (t - a.time_s) / (b.time_s - a.time_s);
  JointConfig out;
  for (std::size_t i = 0; i < manipulator::kPositionedJoints; ++i)
    out.joint(i) = a.joints.joint(i) + u * (b.joints.joint(i) - a.joints.joint(i));
  out.gripper_m = a.joints.gripper_m + u * (b.joints.gripper_m - a.joints.gripper_m);
  return out;
}

WheelSpeeds locomotion_step(ControllerState& state, const BodyTwist& cmd, double dt_s,
                            const ChassisGeometry& chassis) {
  if (!(dt_s > 0.0)) throw InvalidArgument("locomotion_step: dt_s must be > 0");
  const BodyTwist target = locomotion::clamp_twist(cmd, chassis);
  const WheelSpeeds from = locomotion::wheel_speeds_from_twist(state.last_twist, chassis);
  const WheelSpeeds to = locomotion::wheel_speeds_from_twist(target, chassis);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(to[i] - from[i]));
  const double allowed = chassis.max_wheel_accel_rad_s2 * dt_s;
  if (worst <= allowed) {
    state.last_twist = target;
    return to;
  }
  // The wheel map is linear, so scaling the twist step scales every wheel step.
  const double k = allowed / worst;
  const BodyTwist& last = state.last_twist;
  state.last_twist = {last.vx_m_s + k * (target.vx_m_s - last.vx_m_s),
                      last.vy_m_s + k * (target.vy_m_s - last.vy_m_s),
                      last.w_rad_s + k * (target.w_rad_s - last.w_rad_s)};
  return locomotion::wheel_speeds_from_twist(state.last_twist, chassis);
}

JointConfig manipulator_step(const ControllerState& state, double now_s, const JointConfig& measured,
                             const std::array<double, manipulator::kPositionedJoints>& external_torque,
                             const ManipulatorGeometry& geom) {
  JointConfig target = state.active_trajectory.empty() ? state.hold : state.active_trajectory.sample(now_s);
  const Compliance& cc = state.compliance;
  for (std::size_t i = 0; i < manipulator::kPositionedJoints; ++i) {
    const double torque = std::abs(external_torque[i]);
    if (!(torque > cc.torque_threshold)) continue;
    const double yield = torque / cc.stiffness[i];
    const double want = target.joint(i);
    const double have = measured.joint(i);
    // Spring yield toward the measured position, never past it.
    target.joint(i) = want > have ? std::max(have, want - yield) : std::min(have, want + yield);
  }
  target.lift_m = geom.lift_range_m.clamp(target.lift_m);
  for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i)
    target.theta_rad[i] = geom.joint_limits_rad[i].clamp(target.theta_rad[i]);
  target.gripper_m = manipulator::gripper_target(target.gripper_m, geom);
  return target;
}

PTRUAngles ptru_step(ControllerState& state, const ptru::HeadSampleHistory& history, double dt_s) {
  if (!(dt_s > 0.0)) throw InvalidArgument("ptru_step: dt_s must be > 0");
  if (history.empty()) return state.last_ptru_command;
  const auto predicted = ptru::predict_head_pose(history, state.ptru_latency_estimate_s);
  const PTRUAngles want = ptru::ptru_angles_from_quaternion(predicted);
  const PTRUAngles& last = state.last_ptru_command;
  const auto& rate = state.ptru_limits.rate_limits;
  PTRUAngles cmd{last.pan_rad + clamp_abs(want.pan_rad - last.pan_rad, rate[0] * dt_s),
                 last.tilt_rad + clamp_abs(want.tilt_rad - last.tilt_rad, rate[1] * dt_s),
                 last.roll_rad + clamp_abs(want.roll_rad - last.roll_rad, rate[2] * dt_s)};
  cmd = state.ptru_limits.workspace.clamp(cmd);
  state.last_ptru_command = cmd;
  return cmd;
}

JointTrajectory plan_joint_move(const JointConfig& from, const JointConfig& to, double start_s,
                                const std::array<double, 7>& speed_limits, double min_duration_s,
                                const ManipulatorGeometry& geom) {
  double duration = min_duration_s;
  for (std::size_t i = 0; i < manipulator::kPositionedJoints; ++i)
    duration = std::max(duration, std::abs(to.joint(i) - from.joint(i)) / speed_limits[i]);
  duration = std::max(duration, std::abs(to.gripper_m - from.gripper_m) / speed_limits[6]);
  JointConfig start = from;
  // The measured start may sit marginally outside the limits after a yield.
  start.lift_m = geom.lift_range_m.clamp(start.lift_m);
  for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i)
    start.theta_rad[i] = geom.joint_limits_rad[i].clamp(start.theta_rad[i]);
  start.gripper_m = manipulator::gripper_target(start.gripper_m, geom);
  return JointTrajectory({{start_s, start}, {start_s + duration, to}}, geom);
}

}  // namespace mavi::control
