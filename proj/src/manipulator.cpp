#include "mavi/manipulator.hpp"

#include <sstream>

namespace mavi::manipulator {

namespace {

std::string describe(const ValidityReport& violations) {
  std::ostringstream os;
  os << "joint limits violated:";
  for (const auto& v : violations)
    os << ' ' << joint_name(v.joint) << '=' << v.value << " not in [" << v.bound.min << ", "
       << v.bound.max << ']';
  return os.str();
}

// acos with floating-point dust at the workspace boundary absorbed.
double guarded_acos(double arg, const char* quantity) {
  if (!std::isfinite(arg) || arg > 1.0 + kAcosSlack || arg < -1.0 - kAcosSlack)
    throw UnreachablePose(quantity, arg);
  if (arg > 1.0) arg = 1.0;
  if (arg < -1.0) arg = -1.0;
  return std::acos(arg);
}

}  // namespace

std::string joint_name(std::size_t joint) {
  if (joint == 0) return "lift";
  if (joint <= kRevoluteJoints) return "theta" + std::to_string(joint);
  return "gripper";
}

UnreachablePose::UnreachablePose(std::string quantity, double value)
    : std::runtime_error("unreachable pose: " + quantity + " = " + std::to_string(value)),
      quantity_(std::move(quantity)),
      value_(value) {}

JointLimitError::JointLimitError(ValidityReport violations)
    : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

void ManipulatorGeometry::validate() const {
  for (std::size_t i = 0; i < link_lengths_m.size(); ++i) {
    if (!(link_lengths_m[i] > 0.0))
      throw InvalidArgument("manipulator.link_lengths_m[" + std::to_string(i) + "] must be > 0");
  }
  if (!(lift_range_m.min < lift_range_m.max))
    throw InvalidArgument("manipulator.lift_range_m: min must be < max");
  for (std::size_t i = 0; i < kRevoluteJoints; ++i) {
    if (!(joint_limits_rad[i].min < joint_limits_rad[i].max))
      throw InvalidArgument("manipulator.joint_limits_rad[" + std::to_string(i) +
                            "]: min must be < max");
  }
  if (!(gripper_max_m > 0.0)) throw InvalidArgument("manipulator.gripper_max_m must be > 0");
  if (!(payload_limit_kg > 0.0)) throw InvalidArgument("manipulator.payload_limit_kg must be > 0");
}

EEPose forward_kinematics(const JointConfig& q, const ManipulatorGeometry& g) {
  const auto& th = q.theta_rad;
  const double heading = th[0] + th[1] + th[2];
  const double wrist = g.wrist_reach(th[3]);
  EEPose p;
  p.x_m = g.l(0) + g.l(1) * std::cos(th[0]) + g.l(2) * std::cos(th[0] + th[1]) +
          wrist * std::cos(heading);
  p.y_m = g.l(1) * std::sin(th[0]) + g.l(2) * std::sin(th[0] + th[1]) + wrist * std::sin(heading);
  p.z_m = g.z_offset_m + q.lift_m + (g.l(4) + g.l(5)) * std::sin(th[3]);
  p.pitch_rad = th[3];
  p.planar_heading_rad = heading;
  p.roll_rad = th[4];
  return p;
}

JointConfig solve_ik(const EEPose& pose, const ManipulatorGeometry& g) {
  require_finite(pose.x_m, "pose.x");
  require_finite(pose.y_m, "pose.y");
  require_finite(pose.z_m, "pose.z");
  require_finite(pose.pitch_rad, "pose.pitch");
  require_finite(pose.planar_heading_rad, "pose.heading");
  require_finite(pose.roll_rad, "pose.roll");

  const double l1 = g.l(1);
  const double l2 = g.l(2);
  const double wrist = g.wrist_reach(pose.pitch_rad);

  // Planar-chain target: the wrist contribution removed from the goal.
  const double x = pose.x_m - g.l(0) - wrist * std::cos(pose.planar_heading_rad);
  const double y = pose.y_m - wrist * std::sin(pose.planar_heading_rad);
  const double d2 = x * x + y * y;
  const double d = std::sqrt(d2);
  if (!(d > 0.0)) throw UnreachablePose("planar_distance", d);

  const double shoulder = guarded_acos((d2 + l1 * l1 - l2 * l2) / (2.0 * l1 * d), "shoulder_cos");
  const double elbow = guarded_acos((-d2 + l1 * l1 + l2 * l2) / (2.0 * l1 * l2), "elbow_cos");

  JointConfig q;
  q.theta_rad[0] = wrap_angle(std::atan2(y, x) - shoulder);
  q.theta_rad[1] = kPi - elbow;
  q.theta_rad[2] = wrap_angle(pose.planar_heading_rad - q.theta_rad[0] - q.theta_rad[1]);
  q.theta_rad[3] = pose.pitch_rad;
  q.theta_rad[4] = pose.roll_rad;
  q.lift_m = pose.z_m - g.z_offset_m - (g.l(4) + g.l(5)) * std::sin(pose.pitch_rad);

  if (auto report = validate_joints(q, g); !report.empty()) throw JointLimitError(std::move(report));
  return q;
}

ValidityReport validate_joints(const JointConfig& q, const ManipulatorGeometry& g) {
  ValidityReport report;
  if (!g.lift_range_m.contains(q.lift_m)) report.push_back({0, q.lift_m, g.lift_range_m});
  for (std::size_t i = 0; i < kRevoluteJoints; ++i) {
    if (!g.joint_limits_rad[i].contains(q.theta_rad[i]))
      report.push_back({i + 1, q.theta_rad[i], g.joint_limits_rad[i]});
  }
  const Range grip{0.0, g.gripper_max_m};
  if (!grip.contains(q.gripper_m)) report.push_back({kPositionedJoints, q.gripper_m, grip});
  return report;
}

double gripper_target(double width_m, const ManipulatorGeometry& g) {
  require_finite(width_m, "gripper width");
  return Range{0.0, g.gripper_max_m}.clamp(width_m);
}

}  // namespace mavi::manipulator
