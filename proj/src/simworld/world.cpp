#include "mavi/simworld/world.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace mavi::simworld {

ScenarioError::ScenarioError(std::size_t line, const std::string& message)
    : std::runtime_error("scenario line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ScenarioError(line, "expected a number, got '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ScenarioError(line, "non-finite coordinate '" + std::string(tok) + "'");
  return v;
}

void expect_args(const std::vector<std::string_view>& toks, std::size_t n, std::size_t line) {
  if (toks.size() != n + 1)
    throw ScenarioError(line, "'" + std::string(toks[0]) + "' expects " + std::to_string(n) +
                                  " arguments, got " + std::to_string(toks.size() - 1));
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  bool have_start = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "wall") {
      expect_args(toks, 4, line_no);
      Segment s{{parse_number(toks[1], line_no), parse_number(toks[2], line_no)},
                {parse_number(toks[3], line_no), parse_number(toks[4], line_no)}};
      if (s.a == s.b) throw ScenarioError(line_no, "degenerate wall segment");
      sc.walls.push_back(s);
    } else if (toks[0] == "start") {
      expect_args(toks, 3, line_no);
      if (have_start) throw ScenarioError(line_no, "duplicate start pose");
      sc.start = {parse_number(toks[1], line_no), parse_number(toks[2], line_no),
                  wrap_angle(parse_number(toks[3], line_no))};
      have_start = true;
    } else if (toks[0] == "seed") {
      expect_args(toks, 1, line_no);
      std::uint64_t seed = 0;
      const auto* end = toks[1].data() + toks[1].size();
      auto [ptr, ec] = std::from_chars(toks[1].data(), end, seed);
      if (ec != std::errc{} || ptr != end)
        throw ScenarioError(line_no, "seed must be an unsigned integer");
      sc.seed = seed;
    } else {
      throw ScenarioError(line_no, "unknown directive '" + std::string(toks[0]) + "'");
    }
  }
  if (!have_start) throw ScenarioError(line_no, "missing start pose");
  return sc;
}

World make_world(const Scenario& scenario, const PlantConfig& plant) {
  plant.chassis.validate();
  World w;
  w.walls = scenario.walls;
  w.plant = plant;
  w.robot.pose = scenario.start;
  w.rng_seed = scenario.seed;
  w.rng = NoiseSource(scenario.seed);
  w.history.prev_pose = scenario.start;
  w.history.head = head_orientation(w.robot);
  w.history.prev_head = w.history.head;
  return w;
}

World load_scenario(std::string_view text, const PlantConfig& plant) {
  return make_world(parse_scenario(text), plant);
}

Quaternion body_orientation(const RobotState& robot) {
  return Quaternion::from_axis_angle(0.0, 0.0, 1.0, robot.pose.heading_rad);
}

Quaternion head_orientation(const RobotState& robot) {
  return (body_orientation(robot) * ptru::quaternion_from_ptru_angles(robot.ptru)).normalized();
}

double clearance(const World& world) {
  double best = std::numeric_limits<double>::infinity();
  const Vec2 c{world.robot.pose.x_m, world.robot.pose.y_m};
  for (const auto& s : world.walls) best = std::min(best, point_segment_distance(c, s));
  return best - world.plant.robot_radius_m;
}

namespace {

double lag_toward(double current, double target, double dt, double tau, double rate) {
  double delta = target - current;
  if (tau > 0.0) delta *= 1.0 - std::exp(-dt / tau);
  return current + clamp_abs(delta, rate * dt);
}

}  // namespace

void step(World& world, double dt_s, const WheelSpeeds& wheel_cmd, const JointConfig& joint_cmd,
          const PTRUAngles& ptru_cmd, double base_gripper_cmd) {
  if (!(dt_s > 0.0)) throw InvalidArgument("step: dt_s must be > 0");
  const PlantConfig& plant = world.plant;
  RobotState& robot = world.robot;
  MotionHistory& hist = world.history;
  const Pose2D before = robot.pose;

  const BodyTwist cmd_twist = locomotion::twist_from_wheel_speeds(wheel_cmd, plant.chassis);
  Pose2D target = locomotion::advance_pose(before, cmd_twist, dt_s);
  const Vec2 c{before.x_m, before.y_m};
  const Vec2 d{target.x_m - before.x_m, target.y_m - before.y_m};
  double fraction = 1.0;
  for (const auto& s : world.walls)
    fraction = std::min(fraction, disc_sweep_fraction(c, d, plant.robot_radius_m, s));
  if (fraction < 1.0) {
    ++world.contacts;
    target.x_m = before.x_m + fraction * d.x;
    target.y_m = before.y_m + fraction * d.y;
  }
  robot.pose = target;

  // Achieved twist in the body frame of the midpoint heading.
  const double dtheta = angle_diff(target.heading_rad, before.heading_rad);
  const double mid = before.heading_rad + 0.5 * dtheta;
  const double wx = (target.x_m - before.x_m) / dt_s;
  const double wy = (target.y_m - before.y_m) / dt_s;
  robot.twist = {std::cos(mid) * wx + std::sin(mid) * wy, -std::sin(mid) * wx + std::cos(mid) * wy,
                 dtheta / dt_s};

  const double tau = plant.joint_time_constant_s;
  for (std::size_t i = 0; i < manipulator::kPositionedJoints; ++i) {
    robot.joints.joint(i) =
        lag_toward(robot.joints.joint(i), joint_cmd.joint(i), dt_s, tau, plant.joint_rate_limits[i]);
  }
  robot.joints.gripper_m =
      lag_toward(robot.joints.gripper_m, joint_cmd.gripper_m, dt_s, tau, plant.joint_rate_limits[6]);
  robot.base_gripper_m = lag_toward(robot.base_gripper_m,
                                    std::clamp(base_gripper_cmd, 0.0, plant.base_gripper_max_m),
                                    dt_s, tau, plant.joint_rate_limits[6]);

  const double ptau = plant.ptru_time_constant_s;
  robot.ptru.pan_rad =
      lag_toward(robot.ptru.pan_rad, ptru_cmd.pan_rad, dt_s, ptau, plant.ptru_rate_limits[0]);
  robot.ptru.tilt_rad =
      lag_toward(robot.ptru.tilt_rad, ptru_cmd.tilt_rad, dt_s, ptau, plant.ptru_rate_limits[1]);
  robot.ptru.roll_rad =
      lag_toward(robot.ptru.roll_rad, ptru_cmd.roll_rad, dt_s, ptau, plant.ptru_rate_limits[2]);

  hist.prev_pose = before;
  hist.prev_velocity = hist.velocity;
  hist.velocity = {wx, wy};
  hist.prev_head = hist.head;
  hist.head = head_orientation(robot);
  hist.last_dt_s = dt_s;
  ++hist.steps;

  world.clock_s += dt_s;
}

// ---------------------------------------------------------------- sensors

namespace {

double beam_range(World& world, Vec2 origin, double angle, double range_min, double range_max,
                  double sigma) {
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  const auto hit = ray_cast(origin, dir, world.walls);
  // Noise is drawn for every beam so the stream does not depend on geometry.
  const double noise = world.rng.gaussian(sigma);
  if (!hit) return kNoReturn;
  const double r = *hit + noise;
  if (r < range_min || r > range_max) return kNoReturn;
  return r;
}

}  // namespace

Scan raycast_from(World& world, const Pose2D& pose, const LidarParams& p) {
  if (p.beams < 1) throw InvalidArgument("lidar: beam count must be >= 1");
  if (!(p.range_min < p.range_max)) throw InvalidArgument("lidar: range_min must be < range_max");
  Scan scan;
  scan.angle_min = p.angle_min;
  scan.angle_increment = p.angle_increment;
  scan.angle_max = p.angle_max();
  scan.range_min = p.range_min;
  scan.range_max = p.range_max;
  scan.stamp_s = world.clock_s;
  scan.ranges_m.reserve(p.beams);
  const Vec2 origin{pose.x_m, pose.y_m};
  for (std::size_t i = 0; i < p.beams; ++i) {
    const double angle = pose.heading_rad + p.angle_min + p.angle_increment * static_cast<double>(i);
    scan.ranges_m.push_back(beam_range(world, origin, angle, p.range_min, p.range_max, p.noise_sigma));
  }
  return scan;
}

Scan raycast_lidar(World& world, const LidarParams& params) {
  const Pose2D pose = world.robot.pose;
  return raycast_from(world, pose, params);
}

std::vector<SonarPlacement> sonar_ring(double radius_m) {
  std::vector<SonarPlacement> ring;
  for (std::size_t i = 0; i < kSonarCount; ++i) {
    const double a = static_cast<double>(i) * kPi / 6.0;
    ring.push_back({radius_m * std::cos(a), radius_m * std::sin(a), a});
  }
  return ring;
}

std::array<double, kSonarCount> sample_sonar(World& world, std::span<const SonarPlacement> placements,
                                             const SonarParams& params) {
  if (placements.size() != kSonarCount)
    throw InvalidArgument("sonar: expected 12 placements, got " + std::to_string(placements.size()));
  const Pose2D& pose = world.robot.pose;
  const double c = std::cos(pose.heading_rad);
  const double s = std::sin(pose.heading_rad);
  std::array<double, kSonarCount> out{};
  for (std::size_t i = 0; i < kSonarCount; ++i) {
    const auto& m = placements[i];
    const Vec2 origin{pose.x_m + c * m.x_m - s * m.y_m, pose.y_m + s * m.x_m + c * m.y_m};
    out[i] = beam_range(world, origin, pose.heading_rad + m.angle_rad, params.range_min,
                        params.range_max, params.noise_sigma);
  }
  return out;
}

IMUSample synthesize_imu(World& world, ImuMount mount, const ImuNoise& noise) {
  const MotionHistory& h = world.history;
  const RobotState& robot = world.robot;
  IMUSample out;
  out.stamp_s = world.clock_s;
  out.orientation = mount == ImuMount::Body ? body_orientation(robot) : head_orientation(robot);

  std::array<double, 3> gyro{0.0, 0.0, 0.0};
  std::array<double, 3> accel_world{0.0, 0.0, 0.0};
  if (h.steps > 0 && h.last_dt_s > 0.0) {
    if (mount == ImuMount::Body) {
      gyro[2] = angle_diff(robot.pose.heading_rad, h.prev_pose.heading_rad) / h.last_dt_s;
    } else {
      const auto rv = ptru::log_map(h.prev_head.conjugate() * h.head);
      for (int i = 0; i < 3; ++i) gyro[i] = rv[i] / h.last_dt_s;
    }
    if (h.steps > 1) {
      accel_world[0] = (h.velocity.x - h.prev_velocity.x) / h.last_dt_s;
      accel_world[1] = (h.velocity.y - h.prev_velocity.y) / h.last_dt_s;
    }
  }
  // Sensor frame acceleration.
  const auto accel = ptru::rotate(out.orientation.conjugate(), accel_world);
  for (int i = 0; i < 3; ++i) {
    out.angular_velocity_rad_s[i] = gyro[i] + world.rng.gaussian(noise.gyro_sigma);
    out.linear_acceleration_m_s2[i] = accel[i] + world.rng.gaussian(noise.accel_sigma);
  }
  return out;
}

}  // namespace mavi::simworld
