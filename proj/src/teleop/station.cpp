#include "mavi/teleop/station.hpp"

#include <algorithm>

namespace mavi::teleop {

using devicebus::Bytes;
namespace ids = devicebus::ids;

bool due_on_tick(std::uint64_t tick, int rate_hz) {
  if (rate_hz <= 0 || tick == 0) return false;
  const auto r = static_cast<std::uint64_t>(rate_hz);
  return tick * r / kTickHz > (tick - 1) * r / kTickHz;
}

LatencyModel::LatencyModel(double delay_s, double jitter_s, std::uint64_t seed)
    : delay_s_(delay_s), jitter_s_(jitter_s), rng_(seed) {
  if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) throw InvalidArgument("latency: delay must be >= 0");
  if (!(jitter_s >= 0.0) || !std::isfinite(jitter_s)) throw InvalidArgument("latency: jitter must be >= 0");
}

std::int64_t LatencyModel::delivery_us(const std::string& topic, std::int64_t ingress_us) {
  double extra = delay_s_;
  if (jitter_s_ > 0.0) extra += jitter_s_ * rng_.uniform();
  std::int64_t t = ingress_us + static_cast<std::int64_t>(std::llround(extra * 1e6));
  auto [it, fresh] = last_.try_emplace(topic, t);
  if (!fresh) {
    t = std::max(t, it->second);
    it->second = t;
  }
  return t;
}

namespace {

manipulator::JointConfig home_pose(const manipulator::ManipulatorGeometry& g) {
  manipulator::JointConfig q;
  q.lift_m = g.lift_range_m.clamp(0.5);
  for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i) q.theta_rad[i] = g.joint_limits_rad[i].clamp(0.0);
  return q;
}

Bytes f64_bytes(double v) {
  Bytes b;
  devicebus::put_f64(b, v);
  return b;
}

Json vec(std::initializer_list<double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

template <std::size_t N>
Json vec(const std::array<double, N>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json quat(const ptru::Quaternion& q) { return vec({q.w, q.x, q.y, q.z}); }

constexpr std::uint16_t kSonarNoEcho = 0xFFFF;

StationConfig validated(StationConfig c) {
  validate_config(c);
  return c;
}

}  // namespace

Station::Station(StationConfig config, const simworld::Scenario& scenario)
    : config_(validated(std::move(config))),
      world_(simworld::make_world(scenario, config_.plant())),
      dcm_(config_.bus),
      map_(config_.sensors.map.resolution_m, config_.sensors.map.origin, config_.sensors.map.width,
           config_.sensors.map.height),
      latency_(config_.network.delay_s, config_.network.jitter_s, config_.network.jitter_seed) {
  const auto home = home_pose(config_.manipulator);
  world_.robot.joints = home;
  ctrl_.hold = home;
  joint_cmd_ = home;
  ctrl_.ptru_latency_estimate_s = config_.latency_estimate_s();
  ctrl_.ptru_limits.workspace = config_.ptru.workspace;
  ctrl_.ptru_limits.rate_limits = config_.ptru.command_rate_limits;
  odom_ = world_.robot.pose;
  for (const auto& d : dcm_.registry().modules()) {
    auto dev = std::make_shared<devicebus::EmulatedDevice>(d.device_id, d.read_payload_bytes);
    devices_[d.device_id] = dev;
    dcm_.attach(d.device_id, dev);
  }
  published_map_.assign(map_.cells().size(), simworld::pgm_value(0.0));
  sonar_ring_ = simworld::sonar_ring(config_.sensors.sonar_ring_radius_m);
}

std::uint64_t Station::published(const std::string& topic) const {
  const auto it = seq_.find(topic);
  return it == seq_.end() ? 0 : it->second;
}

Envelope Station::submit(Envelope inbound) {
  inbound.stamp_s = now_s();
  Envelope e = canonical(std::move(inbound));
  const TopicSpec* entry = find_topic(e.topic);
  if (!entry) {
    report_error("unknown-topic", "no such topic '" + e.topic + "'", e.topic, e.seq);
    return e;
  }
  if (entry->direction != Direction::Command) {
    report_error("not-a-command", "topic '" + e.topic + "' is telemetry", e.topic, e.seq);
    return e;
  }
  if (auto err = validate_payload(*entry, e.payload)) {
    report_error("invalid-payload", *err, e.topic, e.seq);
    return e;
  }
  inbound_.emplace(latency_.delivery_us(e.topic, now_us_), e);
  return e;
}

void Station::run_ticks(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) tick();
}

void Station::tick() {
  ++tick_;
  while (!inbound_.empty() && inbound_.begin()->first <= now_us_) {
    const Envelope e = std::move(inbound_.begin()->second);
    inbound_.erase(inbound_.begin());
    deliver(e);
  }
  write_statuses();
  run_controllers();
  last_cycle_ = dcm_.run_cycle();
  apply_plant();
  now_us_ += kTickUs;
  sample_sensors();
  publish_telemetry();
}

// ---------------------------------------------------------------- commands

void Station::report_error(const std::string& code, const std::string& message, const std::string& topic,
                           std::optional<std::uint64_t> seq) {
  Json p = {{"code", code}, {"message", message}};
  if (!topic.empty()) p["topic"] = topic;
  if (seq) p["seq"] = *seq;
  publish("error", std::move(p));
}

void Station::deliver(const Envelope& e) {
  ++delivered_;
  const Json& p = e.payload;
  if (e.topic == "cmd_vel") {
    cmd_twist_ = {p["vx"].get<double>(), p["vy"].get<double>(), p["w"].get<double>()};
    cmd_twist_us_ = now_us_;
    cmd_twist_live_ = true;
  } else if (e.topic == "cmd_ee_pose") {
    handle_ee_pose(e, false);
  } else if (e.topic == "cmd_ee_preview") {
    handle_ee_pose(e, true);
  } else if (e.topic == "cmd_joint_traj") {
    handle_joint_traj(e);
  } else if (e.topic == "cmd_head") {
    handle_head(e);
  } else if (e.topic == "cmd_gripper") {
    handle_gripper(e);
  } else if (e.topic == "cmd_baseline") {
    baseline_.set_baseline(p["mm"].get<double>());
  } else if (e.topic == "cmd_goal") {
    handle_goal(e);
  }
}

void Station::handle_ee_pose(const Envelope& e, bool preview) {
  const Json& p = e.payload;
  const manipulator::EEPose pose{p["x"].get<double>(),     p["y"].get<double>(),       p["z"].get<double>(),
                                 p["pitch"].get<double>(), p["heading"].get<double>(), p["roll"].get<double>()};
  const auto& geom = config_.manipulator;
  try {
    manipulator::JointConfig q = manipulator::solve_ik(pose, geom);
    if (preview) {
      publish("ik_preview", {{"reachable", true}, {"joints", {{"lift", q.lift_m}, {"theta", vec(q.theta_rad)}}}});
      return;
    }
    q.gripper_m = arm_gripper_cmd_;
    ctrl_.active_trajectory = control::plan_joint_move(measured_joints(), q, now_s(), config_.limits.joint_speed,
                                                       config_.limits.min_move_duration_s, geom);
    ctrl_.hold = q;
  } catch (const manipulator::UnreachablePose& err) {
    if (preview) {
      publish("ik_preview", {{"reachable", false}, {"error", std::string("unreachable-pose: ") + err.what()}});
    } else {
      report_error("unreachable-pose", err.what(), e.topic, e.seq);
    }
  } catch (const manipulator::JointLimitError& err) {
    if (preview) {
      publish("ik_preview", {{"reachable", false}, {"error", std::string("joint-limit: ") + err.what()}});
    } else {
      report_error("joint-limit", err.what(), e.topic, e.seq);
    }
  } catch (const InvalidArgument& err) {
    report_error("invalid-command", err.what(), e.topic, e.seq);
  }
}

void Station::handle_joint_traj(const Envelope& e) {
  const auto& geom = config_.manipulator;
  std::vector<control::TrajectoryKnot> knots;
  try {
    for (const auto& k : e.payload["knots"]) {
      if (!k.is_object() || !k.contains("t") || !k["t"].is_number() || !k.contains("lift") || !k["lift"].is_number() ||
          !k.contains("theta") || !k["theta"].is_array() || k["theta"].size() != manipulator::kRevoluteJoints)
        throw InvalidArgument("each knot needs t, lift and theta[5]");
      control::TrajectoryKnot knot;
      const double t = k["t"].get<double>();
      if (!(t >= 0.0)) throw InvalidArgument("knot times must be >= 0");
      knot.time_s = now_s() + t;
      knot.joints.lift_m = k["lift"].get<double>();
      for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i) {
        if (!k["theta"][i].is_number()) throw InvalidArgument("theta entries must be numbers");
        knot.joints.theta_rad[i] = k["theta"][i].get<double>();
      }
      knot.joints.gripper_m = arm_gripper_cmd_;
      knots.push_back(knot);
    }
    if (knots.empty()) throw InvalidArgument("trajectory has no knots");
    if (knots.front().time_s > now_s()) {
      control::TrajectoryKnot start{now_s(), measured_joints()};
      // Clamp the measurement so the finite-precision start knot is in limits.
      start.joints.lift_m = geom.lift_range_m.clamp(start.joints.lift_m);
      for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i)
        start.joints.theta_rad[i] = geom.joint_limits_rad[i].clamp(start.joints.theta_rad[i]);
      start.joints.gripper_m = arm_gripper_cmd_;
      knots.insert(knots.begin(), start);
    }
    control::JointTrajectory traj(knots, geom);
    ctrl_.hold = traj.knots().back().joints;
    ctrl_.active_trajectory = std::move(traj);
  } catch (const manipulator::JointLimitError& err) {
    report_error("joint-limit", err.what(), e.topic, e.seq);
  } catch (const InvalidArgument& err) {
    report_error("invalid-trajectory", err.what(), e.topic, e.seq);
  }
}

void Station::handle_head(const Envelope& e) {
  const Json& o = e.payload["orientation"];
  const ptru::Quaternion q{o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>()};
  if (std::abs(q.norm() - 1.0) > ptru::kNormTolerance) {
    report_error("invalid-quaternion", "cmd_head orientation must be unit norm", e.topic, e.seq);
    return;
  }
  // Two samples ingressed in the same tick share a stamp; keep the first.
  if (!head_.empty() && !(e.stamp_s > head_.latest().stamp_s)) return;
  head_.push(e.stamp_s, q.normalized());
}

void Station::handle_gripper(const Envelope& e) {
  const Json& p = e.payload;
  const std::string target = p.contains("target") ? p["target"].get<std::string>() : "arm";
  if (target != "arm" && target != "base") {
    report_error("invalid-command", "gripper target must be 'arm' or 'base'", e.topic, e.seq);
    return;
  }
  if (p.contains("payload_kg") && p["payload_kg"].get<double>() > config_.manipulator.payload_limit_kg) {
    report_error("payload-limit", "payload exceeds the configured limit", e.topic, e.seq);
    return;
  }
  const double w = p["width"].get<double>();
  if (target == "arm") {
    arm_gripper_cmd_ = manipulator::gripper_target(w, config_.manipulator);
  } else {
    base_gripper_cmd_ = std::clamp(w, 0.0, config_.base_gripper_max_m);
  }
}

void Station::handle_goal(const Envelope& e) {
  const simworld::Vec2 goal{e.payload["x"].get<double>(), e.payload["y"].get<double>()};
  const auto& pose = config_.sensors.map.pose_source == MapPoseSource::Truth ? world_.robot.pose : odom_;
  const simworld::Cell start = map_.cell_of({pose.x_m, pose.y_m});
  const simworld::Cell target = map_.cell_of(goal);
  if (!map_.in_bounds(start) || !map_.in_bounds(target)) {
    report_error("invalid-goal", "start or goal outside the map", e.topic, e.seq);
    return;
  }
  const double threshold = config_.limits.plan_occupied_log_odds;
  const auto grid = simworld::inflate(map_, config_.robot_radius_m, threshold);
  try {
    const auto path = simworld::plan_path(grid, start, target, threshold);
    Json wps = Json::array();
    for (const auto& w : path.waypoints) wps.push_back(vec({w.x, w.y}));
    publish("path", {{"waypoints", wps}, {"cost", path.cost * map_.resolution()}, {"goal", vec({goal.x, goal.y})}});
  } catch (const simworld::PlanError& err) {
    report_error(err.kind() == simworld::PlanError::Kind::NoPath ? "no-path" : "goal-occupied", err.what(), e.topic,
                 e.seq);
  }
}

// ---------------------------------------------------------------- tick stages

void Station::write_statuses() {
  const auto& robot = world_.robot;
  const auto& chassis = config_.chassis;
  const auto sensed =
      locomotion::apply_encoder_sign(locomotion::wheel_speeds_from_twist(robot.twist, chassis), chassis);
  for (std::uint8_t i = 0; i < 4; ++i) devices_.at(ids::kWheelBase + i)->set_status(f64_bytes(sensed[i]));
  for (std::uint8_t i = 0; i < manipulator::kPositionedJoints; ++i)
    devices_.at(ids::kArmBase + i)->set_status(f64_bytes(robot.joints.joint(i)));
  devices_.at(ids::kArmGripper)->set_status(f64_bytes(robot.joints.gripper_m));
  devices_.at(ids::kBaseGripper)->set_status(f64_bytes(robot.base_gripper_m));
  devices_.at(ids::kPtruBase + 0)->set_status(f64_bytes(robot.ptru.pan_rad));
  devices_.at(ids::kPtruBase + 1)->set_status(f64_bytes(robot.ptru.tilt_rad));
  devices_.at(ids::kPtruBase + 2)->set_status(f64_bytes(robot.ptru.roll_rad));

  for (auto [id, mount] : {std::pair{ids::kImuBody, simworld::ImuMount::Body}, std::pair{ids::kImuHead, simworld::ImuMount::Head}}) {
    const auto s = simworld::synthesize_imu(world_, mount, config_.sensors.imu);
    Bytes b;
    for (double v : {s.orientation.w, s.orientation.x, s.orientation.y, s.orientation.z})
      devicebus::put_f32(b, static_cast<float>(v));
    for (double v : s.angular_velocity_rad_s) devicebus::put_f32(b, static_cast<float>(v));
    for (double v : s.linear_acceleration_m_s2) devicebus::put_f32(b, static_cast<float>(v));
    b.resize(devices_.at(id)->status().size(), 0);
    devices_.at(id)->set_status(std::move(b));
  }

  const auto* sonar = dcm_.registry().find(ids::kSonar);
  if (dcm_.cycle_index() % sonar->rate_divider() == 0) {
    const auto ranges = simworld::sample_sonar(world_, sonar_ring_, config_.sensors.sonar);
    Bytes b;
    for (double r : ranges) {
      const bool echo = std::isfinite(r);
      devicebus::put_u16(b, echo ? static_cast<std::uint16_t>(std::min(65534.0, std::round(r * 1000.0))) : kSonarNoEcho);
    }
    b.resize(devices_.at(ids::kSonar)->status().size(), 0);
    devices_.at(ids::kSonar)->set_status(std::move(b));
  }
}

namespace {

double snapshot_f64(const devicebus::DeviceCommunicationManager& dcm, std::uint8_t id, double fallback) {
  const Bytes* b = dcm.latest_status(id);
  return b && b->size() >= 8 ? devicebus::get_f64(*b, 0) : fallback;
}

}  // namespace

manipulator::JointConfig Station::measured_joints() const {
  manipulator::JointConfig q;
  for (std::uint8_t i = 0; i < manipulator::kPositionedJoints; ++i)
    q.joint(i) = snapshot_f64(dcm_, ids::kArmBase + i, world_.robot.joints.joint(i));
  q.gripper_m = snapshot_f64(dcm_, ids::kArmGripper, world_.robot.joints.gripper_m);
  return q;
}

void Station::run_controllers() {
  const double dt = static_cast<double>(kTickUs) / 1e6;
  const auto& chassis = config_.chassis;

  if (dcm_.latest_status(ids::kWheelBase)) {
    locomotion::WheelSpeeds sensed;
    for (std::uint8_t i = 0; i < 4; ++i) sensed[i] = snapshot_f64(dcm_, ids::kWheelBase + i, 0.0);
    odom_ = locomotion::integrate_odometry(odom_, sensed, dt, chassis);
  }

  if (cmd_twist_live_ &&
      now_us_ - cmd_twist_us_ > static_cast<std::int64_t>(std::llround(config_.limits.cmd_vel_timeout_s * 1e6))) {
    cmd_twist_ = {};
    cmd_twist_live_ = false;
  }
  wheel_cmd_ = control::locomotion_step(ctrl_, cmd_twist_, dt, chassis);

  static const std::array<double, manipulator::kPositionedJoints> kNoTorque{};
  joint_cmd_ = control::manipulator_step(ctrl_, now_s(), measured_joints(), kNoTorque, config_.manipulator);
  joint_cmd_.gripper_m = arm_gripper_cmd_;

  ptru_cmd_ = control::ptru_step(ctrl_, head_, dt);

  for (std::uint8_t i = 0; i < 4; ++i) dcm_.queue_write(ids::kWheelBase + i, f64_bytes(wheel_cmd_[i]));
  for (std::uint8_t i = 0; i < manipulator::kPositionedJoints; ++i)
    dcm_.queue_write(ids::kArmBase + i, f64_bytes(joint_cmd_.joint(i)));
  dcm_.queue_write(ids::kArmGripper, f64_bytes(joint_cmd_.gripper_m));
  dcm_.queue_write(ids::kBaseGripper, f64_bytes(base_gripper_cmd_));
  dcm_.queue_write(ids::kPtruBase + 0, f64_bytes(ptru_cmd_.pan_rad));
  dcm_.queue_write(ids::kPtruBase + 1, f64_bytes(ptru_cmd_.tilt_rad));
  dcm_.queue_write(ids::kPtruBase + 2, f64_bytes(ptru_cmd_.roll_rad));
}

void Station::apply_plant() {
  auto cmd = [&](std::uint8_t id, double current) {
    const auto& c = devices_.at(id)->last_command();
    return c && c->size() >= 8 ? devicebus::get_f64(*c, 0) : current;
  };
  auto& robot = world_.robot;
  locomotion::WheelSpeeds wheels;
  for (std::uint8_t i = 0; i < 4; ++i) wheels[i] = cmd(ids::kWheelBase + i, 0.0);
  manipulator::JointConfig joints;
  for (std::uint8_t i = 0; i < manipulator::kPositionedJoints; ++i)
    joints.joint(i) = cmd(ids::kArmBase + i, robot.joints.joint(i));
  joints.gripper_m = cmd(ids::kArmGripper, robot.joints.gripper_m);
  const ptru::PTRUAngles head{cmd(ids::kPtruBase + 0, robot.ptru.pan_rad), cmd(ids::kPtruBase + 1, robot.ptru.tilt_rad),
                              cmd(ids::kPtruBase + 2, robot.ptru.roll_rad)};
  const double base = cmd(ids::kBaseGripper, robot.base_gripper_m);
  simworld::step(world_, static_cast<double>(kTickUs) / 1e6, wheels, joints, head, base);
}

void Station::sample_sensors() {
  if (!due_on_tick(tick_, config_.sensors.lidar.rate_hz)) return;
  last_scan_ = simworld::raycast_lidar(world_, config_.sensors.lidar.params);
  last_scan_.stamp_s = now_s();
  have_scan_ = true;
  const auto& pose = config_.sensors.map.pose_source == MapPoseSource::Truth ? world_.robot.pose : odom_;
  if (map_.in_bounds(map_.cell_of({pose.x_m, pose.y_m}))) simworld::update_map(map_, pose, last_scan_);
}

void Station::publish(const std::string& topic, Json payload) {
  Envelope e{topic, now_s(), seq_[topic]++, std::move(payload)};
  if (sink_) sink_(e);
}

void Station::publish_telemetry() {
  const auto& rates = config_.rates;
  auto due = [&](const char* topic) { return due_on_tick(tick_, rates.at(topic)); };
  const auto& robot = world_.robot;

  if (due("bus_cycle")) {
    std::size_t timeouts = 0;
    for (const auto& t : last_cycle_.transactions) timeouts += t.result == devicebus::TransactionResult::Timeout;
    publish("bus_cycle", {{"cycle", last_cycle_.cycle_index},
                          {"bytes", last_cycle_.bytes_on_wire},
                          {"budget_bits", last_cycle_.bit_time_budget},
                          {"turnaround_bits", last_cycle_.turnaround_bits},
                          {"transactions", last_cycle_.transactions.size()},
                          {"timeouts", timeouts},
                          {"overrun", last_cycle_.overrun},
                          {"utilization", static_cast<double>(last_cycle_.bytes_on_wire * devicebus::kBitsPerByte) /
                                              last_cycle_.bit_time_budget}});
  }
  if (due("wheel_states")) {
    Json measured = Json::array();
    for (std::uint8_t i = 0; i < 4; ++i) measured.push_back(snapshot_f64(dcm_, ids::kWheelBase + i, 0.0));
    publish("wheel_states", {{"command", vec(wheel_cmd_.w_rad_s)}, {"measured", measured}});
  }
  if (due("joint_states")) {
    const auto q = measured_joints();
    const bool moving = !ctrl_.active_trajectory.empty() && now_s() < ctrl_.active_trajectory.end_time();
    publish("joint_states", {{"lift", q.lift_m},
                             {"theta", vec(q.theta_rad)},
                             {"gripper", q.gripper_m},
                             {"base_gripper", snapshot_f64(dcm_, ids::kBaseGripper, robot.base_gripper_m)},
                             {"moving", moving}});
  }
  if (due("ptru_state")) {
    publish("ptru_state", {{"pan", snapshot_f64(dcm_, ids::kPtruBase + 0, robot.ptru.pan_rad)},
                           {"tilt", snapshot_f64(dcm_, ids::kPtruBase + 1, robot.ptru.tilt_rad)},
                           {"roll", snapshot_f64(dcm_, ids::kPtruBase + 2, robot.ptru.roll_rad)},
                           {"command", vec({ptru_cmd_.pan_rad, ptru_cmd_.tilt_rad, ptru_cmd_.roll_rad})},
                           {"baseline_mm", baseline_.mm()}});
  }
  for (auto [topic, id] : {std::pair{"imu_body", ids::kImuBody}, std::pair{"imu_head", ids::kImuHead}}) {
    if (!due(topic)) continue;
    const Bytes* b = dcm_.latest_status(id);
    if (!b || b->size() < 40) continue;
    auto f = [&](std::size_t i) { return static_cast<double>(devicebus::get_f32(*b, 4 * i)); };
    publish(topic, {{"orientation", vec({f(0), f(1), f(2), f(3)})},
                    {"angular_velocity", vec({f(4), f(5), f(6)})},
                    {"linear_acceleration", vec({f(7), f(8), f(9)})}});
  }
  if (due("pose2d")) {
    publish("pose2d", {{"x", robot.pose.x_m},
                       {"y", robot.pose.y_m},
                       {"heading", robot.pose.heading_rad},
                       {"vx", robot.twist.vx_m_s},
                       {"vy", robot.twist.vy_m_s},
                       {"w", robot.twist.w_rad_s},
                       {"odom_x", odom_.x_m},
                       {"odom_y", odom_.y_m},
                       {"odom_heading", odom_.heading_rad}});
  }
  if (due("sonar")) {
    if (const Bytes* b = dcm_.latest_status(ids::kSonar); b && b->size() >= 24) {
      Json ranges = Json::array();
      for (std::size_t i = 0; i < simworld::kSonarCount; ++i) {
        const auto mm = devicebus::get_u16(*b, 2 * i);
        ranges.push_back(mm == kSonarNoEcho ? Json(nullptr) : Json(mm / 1000.0));
      }
      publish("sonar", {{"ranges", ranges}});
    }
  }
  if (due("scan") && have_scan_) {
    Json ranges = Json::array();
    for (double r : last_scan_.ranges_m) ranges.push_back(std::isfinite(r) ? Json(r) : Json(nullptr));
    publish("scan", {{"angle_min", last_scan_.angle_min},
                     {"angle_max", last_scan_.angle_max},
                     {"angle_increment", last_scan_.angle_increment},
                     {"range_min", last_scan_.range_min},
                     {"range_max", last_scan_.range_max},
                     {"ranges", ranges}});
  }
  if (due("map_delta")) {
    Json cells = Json::array();
    const auto dirty = map_.take_dirty();
    for (std::size_t idx : dirty) {
      const std::uint8_t v = simworld::pgm_value(map_.cells()[idx]);
      if (v == published_map_[idx]) continue;
      published_map_[idx] = v;
      cells.push_back(Json::array({idx, v}));
    }
    if (!cells.empty())
      publish("map_delta", {{"resolution", map_.resolution()},
                            {"origin", vec({map_.origin().x, map_.origin().y})},
                            {"width", map_.width()},
                            {"height", map_.height()},
                            {"cells", cells}});
  }
  if (due("camera_pose")) {
    publish("camera_pose", {{"orientation", quat(simworld::head_orientation(robot))},
                            {"position", vec({robot.pose.x_m, robot.pose.y_m, config_.ptru.mount_height_m})},
                            {"baseline_mm", baseline_.mm()}});
  }
}

}  // namespace mavi::teleop
