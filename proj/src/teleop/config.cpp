#include "mavi/teleop/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace mavi::teleop {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error("config " + (path.empty() ? std::string("<root>") : path) + ": " + message),
      path_(std::move(path)) {}

RateTable default_rates() {
  return {{"pose2d", 50},    {"wheel_states", 100}, {"joint_states", 100}, {"ptru_state", 100},
          {"imu_body", 100}, {"imu_head", 100},     {"scan", 10},          {"sonar", 20},
          {"map_delta", 10}, {"bus_cycle", 10},     {"camera_pose", 30}};
}

simworld::PlantConfig StationConfig::plant() const {
  simworld::PlantConfig p;
  p.chassis = chassis;
  p.robot_radius_m = robot_radius_m;
  p.joint_time_constant_s = joint_servo_time_constant_s;
  p.joint_rate_limits = joint_servo_rate_limits;
  p.ptru_time_constant_s = ptru.servo_time_constant_s;
  p.ptru_rate_limits = ptru.servo_rate_limits;
  p.base_gripper_max_m = base_gripper_max_m;
  return p;
}

namespace {

// Object reader that remembers which keys were consumed.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* get(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::optional<Obj> obj(const std::string& key) {
    if (const Json* v = get(key)) return Obj(*v, sub(key));
    return std::nullopt;
  }

  void num(const std::string& key, double& out) {
    if (const Json* v = get(key)) out = number(*v, sub(key));
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const Json* v = get(key)) {
      const std::int64_t w = whole(*v, sub(key));
      if (std::is_unsigned_v<Int> && w < 0) throw ConfigError(sub(key), "must be >= 0");
      out = static_cast<Int>(w);
    }
  }

  template <std::size_t N>
  void nums(const std::string& key, std::array<double, N>& out) {
    if (const Json* v = get(key)) {
      const std::string p = sub(key);
      array_of(*v, p, N);
      for (std::size_t i = 0; i < N; ++i) out[i] = number((*v)[i], p + "[" + std::to_string(i) + "]");
    }
  }

  void range(const std::string& key, double& lo, double& hi) {
    std::array<double, 2> r{lo, hi};
    nums(key, r);
    lo = r[0];
    hi = r[1];
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) out.push_back(it.key());
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(sub(it.key()), "unknown key");
  }

  static double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
  }

  static std::int64_t whole(const Json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(path, "expected an integer");
  }

  static void array_of(const Json& v, const std::string& path, std::size_t n) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    if (v.size() != n)
      throw ConfigError(path, "expected " + std::to_string(n) + " elements, got " + std::to_string(v.size()));
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_chassis(Obj o, StationConfig& c) {
  auto& ch = c.chassis;
  o.num("wheel_radius_m", ch.wheel_radius_m);
  o.num("half_base_x_m", ch.half_base_x_m);
  o.num("half_base_y_m", ch.half_base_y_m);
  if (const Json* v = o.get("encoder_sign")) {
    const std::string p = o.sub("encoder_sign");
    Obj::array_of(*v, p, 4);
    for (std::size_t i = 0; i < 4; ++i) ch.encoder_sign[i] = static_cast<int>(Obj::whole((*v)[i], p + "[" + std::to_string(i) + "]"));
  }
  if (auto t = o.obj("max_twist")) {
    t->num("vx_m_s", ch.max_twist.vx_m_s);
    t->num("vy_m_s", ch.max_twist.vy_m_s);
    t->num("w_rad_s", ch.max_twist.w_rad_s);
    t->finish();
  }
  o.num("max_wheel_accel_rad_s2", ch.max_wheel_accel_rad_s2);
  o.num("robot_radius_m", c.robot_radius_m);
  o.finish();
}

void read_manipulator(Obj o, StationConfig& c) {
  auto& m = c.manipulator;
  o.nums("link_lengths_m", m.link_lengths_m);
  o.range("lift_range_m", m.lift_range_m.min, m.lift_range_m.max);
  if (const Json* v = o.get("joint_limits_rad")) {
    const std::string p = o.sub("joint_limits_rad");
    Obj::array_of(*v, p, manipulator::kRevoluteJoints);
    for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      Obj::array_of((*v)[i], pi, 2);
      m.joint_limits_rad[i] = {Obj::number((*v)[i][0], pi + "[0]"), Obj::number((*v)[i][1], pi + "[1]")};
    }
  }
  o.num("gripper_max_m", m.gripper_max_m);
  o.num("payload_limit_kg", m.payload_limit_kg);
  o.num("z_offset_m", m.z_offset_m);
  o.num("servo_time_constant_s", c.joint_servo_time_constant_s);
  o.nums("servo_rate_limits", c.joint_servo_rate_limits);
  o.num("base_gripper_max_m", c.base_gripper_max_m);
  o.finish();
}

void read_ptru(Obj o, StationConfig& c) {
  auto& p = c.ptru;
  if (auto w = o.obj("workspace_rad")) {
    w->range("pan", p.workspace.pan.min, p.workspace.pan.max);
    w->range("tilt", p.workspace.tilt.min, p.workspace.tilt.max);
    w->range("roll", p.workspace.roll.min, p.workspace.roll.max);
    w->finish();
  }
  o.nums("command_rate_limits", p.command_rate_limits);
  if (const Json* v = o.get("latency_estimate_s")) {
    if (!v->is_null()) p.latency_estimate_s = Obj::number(*v, o.sub("latency_estimate_s"));
  }
  o.num("servo_time_constant_s", p.servo_time_constant_s);
  o.nums("servo_rate_limits", p.servo_rate_limits);
  o.num("mount_height_m", p.mount_height_m);
  o.finish();
}

void read_bus(Obj o, StationConfig& c) {
  if (const Json* mods = o.get("modules")) {
    const std::string p = o.sub("modules");
    if (!mods->is_array()) throw ConfigError(p, "expected an array");
    devicebus::Registry reg;
    for (std::size_t i = 0; i < mods->size(); ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      Obj m((*mods)[i], pi);
      devicebus::ModuleDescriptor d;
      int id = -1;
      m.integer("id", id);
      if (id < 0 || id >= devicebus::kBroadcastId) throw ConfigError(m.sub("id"), "must be in [0, 253]");
      d.device_id = static_cast<std::uint8_t>(id);
      const Json* kind = m.get("kind");
      if (!kind || !kind->is_string()) throw ConfigError(m.sub("kind"), "expected a module kind string");
      const auto k = devicebus::module_kind_from_string(kind->get<std::string>());
      if (!k) throw ConfigError(m.sub("kind"), "unknown module kind '" + kind->get<std::string>() + "'");
      d.kind = *k;
      m.integer("read_bytes", d.read_payload_bytes);
      m.integer("write_bytes", d.write_payload_bytes);
      m.integer("rate_hz", d.poll_rate_hz);
      m.finish();
      try {
        reg.register_module(d);
      } catch (const std::exception& e) {
        throw ConfigError(pi, e.what());
      }
    }
    c.bus = std::move(reg);
  }
  o.finish();
}

void read_sensors(Obj o, StationConfig& c) {
  auto& s = c.sensors;
  if (auto l = o.obj("lidar")) {
    l->integer("beams", s.lidar.params.beams);
    l->num("angle_min", s.lidar.params.angle_min);
    l->num("angle_increment", s.lidar.params.angle_increment);
    l->num("range_min", s.lidar.params.range_min);
    l->num("range_max", s.lidar.params.range_max);
    l->num("noise_sigma", s.lidar.params.noise_sigma);
    l->integer("rate_hz", s.lidar.rate_hz);
    l->finish();
  }
  if (auto so = o.obj("sonar")) {
    so->num("ring_radius_m", s.sonar_ring_radius_m);
    so->num("range_min", s.sonar.range_min);
    so->num("range_max", s.sonar.range_max);
    so->num("noise_sigma", s.sonar.noise_sigma);
    so->finish();
  }
  if (auto im = o.obj("imu")) {
    im->num("gyro_sigma", s.imu.gyro_sigma);
    im->num("accel_sigma", s.imu.accel_sigma);
    im->finish();
  }
  if (auto m = o.obj("map")) {
    m->num("resolution_m", s.map.resolution_m);
    std::array<double, 2> origin{s.map.origin.x, s.map.origin.y};
    m->nums("origin", origin);
    s.map.origin = {origin[0], origin[1]};
    m->integer("width", s.map.width);
    m->integer("height", s.map.height);
    if (const Json* v = m->get("pose_source")) {
      const std::string p = m->sub("pose_source");
      if (*v == "truth") {
        s.map.pose_source = MapPoseSource::Truth;
      } else if (*v == "odometry") {
        s.map.pose_source = MapPoseSource::Odometry;
      } else {
        throw ConfigError(p, "expected \"truth\" or \"odometry\"");
      }
    }
    m->finish();
  }
  o.finish();
}

void read_rates(Obj o, StationConfig& c) {
  for (const auto& key : o.keys()) {
    if (!c.rates.count(key)) throw ConfigError(o.sub(key), "not a periodic telemetry topic");
    o.integer(key, c.rates[key]);
  }
  o.finish();
}

void read_limits(Obj o, StationConfig& c) {
  o.num("cmd_vel_timeout_s", c.limits.cmd_vel_timeout_s);
  o.nums("joint_speed", c.limits.joint_speed);
  o.num("min_move_duration_s", c.limits.min_move_duration_s);
  o.num("plan_occupied_log_odds", c.limits.plan_occupied_log_odds);
  o.finish();
}

void read_network(Obj o, StationConfig& c) {
  o.num("delay_s", c.network.delay_s);
  o.num("jitter_s", c.network.jitter_s);
  o.integer("jitter_seed", c.network.jitter_seed);
  o.integer("queue_capacity", c.network.queue_capacity);
  o.finish();
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
}

void non_negative(double v, const std::string& path) {
  if (!(v >= 0.0)) throw ConfigError(path, "must be >= 0");
}

void ordered(double lo, double hi, const std::string& path) {
  if (!(lo < hi)) throw ConfigError(path, "min must be < max");
}

struct RequiredModule {
  std::uint8_t id;
  std::size_t read;
  std::size_t write;
};

}  // namespace

void validate_config(const StationConfig& c) {
  const auto& ch = c.chassis;
  positive(ch.wheel_radius_m, "chassis.wheel_radius_m");
  positive(ch.half_base_x_m, "chassis.half_base_x_m");
  positive(ch.half_base_y_m, "chassis.half_base_y_m");
  for (std::size_t i = 0; i < 4; ++i)
    if (ch.encoder_sign[i] != 1 && ch.encoder_sign[i] != -1)
      throw ConfigError("chassis.encoder_sign[" + std::to_string(i) + "]", "must be +1 or -1");
  positive(ch.max_twist.vx_m_s, "chassis.max_twist.vx_m_s");
  positive(ch.max_twist.vy_m_s, "chassis.max_twist.vy_m_s");
  positive(ch.max_twist.w_rad_s, "chassis.max_twist.w_rad_s");
  positive(ch.max_wheel_accel_rad_s2, "chassis.max_wheel_accel_rad_s2");
  positive(c.robot_radius_m, "chassis.robot_radius_m");

  const auto& m = c.manipulator;
  for (std::size_t i = 0; i < 6; ++i) {
    const std::string p = "manipulator.link_lengths_m[" + std::to_string(i) + "]";
    if (i == 1 || i == 2) {
      positive(m.link_lengths_m[i], p);
    } else {
      non_negative(m.link_lengths_m[i], p);
    }
  }
  ordered(m.lift_range_m.min, m.lift_range_m.max, "manipulator.lift_range_m");
  for (std::size_t i = 0; i < manipulator::kRevoluteJoints; ++i)
    ordered(m.joint_limits_rad[i].min, m.joint_limits_rad[i].max,
            "manipulator.joint_limits_rad[" + std::to_string(i) + "]");
  positive(m.gripper_max_m, "manipulator.gripper_max_m");
  positive(m.payload_limit_kg, "manipulator.payload_limit_kg");
  non_negative(c.joint_servo_time_constant_s, "manipulator.servo_time_constant_s");
  for (std::size_t i = 0; i < 7; ++i)
    positive(c.joint_servo_rate_limits[i], "manipulator.servo_rate_limits[" + std::to_string(i) + "]");
  positive(c.base_gripper_max_m, "manipulator.base_gripper_max_m");

  const auto& p = c.ptru;
  ordered(p.workspace.pan.min, p.workspace.pan.max, "ptru.workspace_rad.pan");
  ordered(p.workspace.tilt.min, p.workspace.tilt.max, "ptru.workspace_rad.tilt");
  ordered(p.workspace.roll.min, p.workspace.roll.max, "ptru.workspace_rad.roll");
  for (std::size_t i = 0; i < 3; ++i) {
    positive(p.command_rate_limits[i], "ptru.command_rate_limits[" + std::to_string(i) + "]");
    positive(p.servo_rate_limits[i], "ptru.servo_rate_limits[" + std::to_string(i) + "]");
  }
  if (p.latency_estimate_s) non_negative(*p.latency_estimate_s, "ptru.latency_estimate_s");
  non_negative(p.servo_time_constant_s, "ptru.servo_time_constant_s");

  // The station drives these devices directly.
  std::vector<RequiredModule> required;
  for (std::uint8_t i = 0; i < 4; ++i) required.push_back({static_cast<std::uint8_t>(devicebus::ids::kWheelBase + i), 8, 8});
  for (std::uint8_t i = 0; i < 6; ++i) required.push_back({static_cast<std::uint8_t>(devicebus::ids::kArmBase + i), 8, 8});
  required.push_back({devicebus::ids::kArmGripper, 8, 8});
  required.push_back({devicebus::ids::kBaseGripper, 8, 8});
  for (std::uint8_t i = 0; i < 3; ++i) required.push_back({static_cast<std::uint8_t>(devicebus::ids::kPtruBase + i), 8, 8});
  required.push_back({devicebus::ids::kImuBody, 40, 0});
  required.push_back({devicebus::ids::kImuHead, 40, 0});
  required.push_back({devicebus::ids::kSonar, 24, 0});
  for (const auto& r : required) {
    const auto* d = c.bus.find(r.id);
    if (!d) throw ConfigError("bus.modules", "missing required device id " + std::to_string(r.id));
    if (d->read_payload_bytes < r.read || d->write_payload_bytes < r.write)
      throw ConfigError("bus.modules", "device " + std::to_string(r.id) + " payload sizes too small");
  }

  const auto& s = c.sensors;
  if (s.lidar.params.beams < 1) throw ConfigError("sensors.lidar.beams", "must be >= 1");
  positive(s.lidar.params.angle_increment, "sensors.lidar.angle_increment");
  non_negative(s.lidar.params.range_min, "sensors.lidar.range_min");
  ordered(s.lidar.params.range_min, s.lidar.params.range_max, "sensors.lidar.range_max");
  non_negative(s.lidar.params.noise_sigma, "sensors.lidar.noise_sigma");
  if (s.lidar.rate_hz < 1 || s.lidar.rate_hz > 100) throw ConfigError("sensors.lidar.rate_hz", "must be in [1, 100]");
  non_negative(s.sonar_ring_radius_m, "sensors.sonar.ring_radius_m");
  non_negative(s.sonar.range_min, "sensors.sonar.range_min");
  ordered(s.sonar.range_min, s.sonar.range_max, "sensors.sonar.range_max");
  non_negative(s.sonar.noise_sigma, "sensors.sonar.noise_sigma");
  non_negative(s.imu.gyro_sigma, "sensors.imu.gyro_sigma");
  non_negative(s.imu.accel_sigma, "sensors.imu.accel_sigma");
  positive(s.map.resolution_m, "sensors.map.resolution_m");
  if (s.map.width < 1) throw ConfigError("sensors.map.width", "must be >= 1");
  if (s.map.height < 1) throw ConfigError("sensors.map.height", "must be >= 1");
  if (static_cast<std::int64_t>(s.map.width) * s.map.height > 16'000'000)
    throw ConfigError("sensors.map", "grid larger than 16M cells");

  for (const auto& [topic, hz] : c.rates) {
    if (hz < 0 || hz > 100) throw ConfigError("rates." + topic, "must be in [0, 100]");
  }
  if (c.rates.at("map_delta") > 10) throw ConfigError("rates.map_delta", "mapping runs at 10 Hz or less");

  positive(c.limits.cmd_vel_timeout_s, "limits.cmd_vel_timeout_s");
  for (std::size_t i = 0; i < 7; ++i) positive(c.limits.joint_speed[i], "limits.joint_speed[" + std::to_string(i) + "]");
  non_negative(c.limits.min_move_duration_s, "limits.min_move_duration_s");

  non_negative(c.network.delay_s, "network.delay_s");
  non_negative(c.network.jitter_s, "network.jitter_s");
  if (c.network.queue_capacity < 1) throw ConfigError("network.queue_capacity", "must be >= 1");
}

StationConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON at byte ") + std::to_string(e.byte));
  }
  StationConfig c;
  Obj root(j, "");
  if (auto o = root.obj("chassis")) read_chassis(std::move(*o), c);
  if (auto o = root.obj("manipulator")) read_manipulator(std::move(*o), c);
  if (auto o = root.obj("ptru")) read_ptru(std::move(*o), c);
  if (auto o = root.obj("bus")) read_bus(std::move(*o), c);
  if (auto o = root.obj("sensors")) read_sensors(std::move(*o), c);
  if (auto o = root.obj("rates")) read_rates(std::move(*o), c);
  if (auto o = root.obj("limits")) read_limits(std::move(*o), c);
  if (auto o = root.obj("network")) read_network(std::move(*o), c);
  root.finish();
  validate_config(c);
  return c;
}

StationConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

template <std::size_t N, typename T>
OJson arr(const std::array<T, N>& a) {
  OJson out = OJson::array();
  for (const auto& v : a) out.push_back(v);
  return out;
}

OJson pair(double a, double b) { return OJson::array({a, b}); }

}  // namespace

OJson config_to_json(const StationConfig& c) {
  OJson j;
  const auto& ch = c.chassis;
  j["chassis"] = {{"wheel_radius_m", ch.wheel_radius_m},
                  {"half_base_x_m", ch.half_base_x_m},
                  {"half_base_y_m", ch.half_base_y_m},
                  {"encoder_sign", arr(ch.encoder_sign)},
                  {"max_twist", {{"vx_m_s", ch.max_twist.vx_m_s}, {"vy_m_s", ch.max_twist.vy_m_s}, {"w_rad_s", ch.max_twist.w_rad_s}}},
                  {"max_wheel_accel_rad_s2", ch.max_wheel_accel_rad_s2},
                  {"robot_radius_m", c.robot_radius_m}};
  const auto& m = c.manipulator;
  OJson limits = OJson::array();
  for (const auto& r : m.joint_limits_rad) limits.push_back(pair(r.min, r.max));
  j["manipulator"] = {{"link_lengths_m", arr(m.link_lengths_m)},
                      {"lift_range_m", pair(m.lift_range_m.min, m.lift_range_m.max)},
                      {"joint_limits_rad", limits},
                      {"gripper_max_m", m.gripper_max_m},
                      {"payload_limit_kg", m.payload_limit_kg},
                      {"z_offset_m", m.z_offset_m},
                      {"servo_time_constant_s", c.joint_servo_time_constant_s},
                      {"servo_rate_limits", arr(c.joint_servo_rate_limits)},
                      {"base_gripper_max_m", c.base_gripper_max_m}};
  const auto& p = c.ptru;
  j["ptru"] = {{"workspace_rad",
                {{"pan", pair(p.workspace.pan.min, p.workspace.pan.max)},
                 {"tilt", pair(p.workspace.tilt.min, p.workspace.tilt.max)},
                 {"roll", pair(p.workspace.roll.min, p.workspace.roll.max)}}},
               {"command_rate_limits", arr(p.command_rate_limits)},
               {"latency_estimate_s", p.latency_estimate_s ? OJson(*p.latency_estimate_s) : OJson(nullptr)},
               {"servo_time_constant_s", p.servo_time_constant_s},
               {"servo_rate_limits", arr(p.servo_rate_limits)},
               {"mount_height_m", p.mount_height_m}};
  OJson mods = OJson::array();
  for (const auto& d : c.bus.modules())
    mods.push_back({{"id", d.device_id},
                    {"kind", devicebus::to_string(d.kind)},
                    {"read_bytes", d.read_payload_bytes},
                    {"write_bytes", d.write_payload_bytes},
                    {"rate_hz", d.poll_rate_hz}});
  j["bus"] = {{"modules", mods}};
  const auto& s = c.sensors;
  j["sensors"] = {
      {"lidar",
       {{"beams", s.lidar.params.beams},
        {"angle_min", s.lidar.params.angle_min},
        {"angle_increment", s.lidar.params.angle_increment},
        {"range_min", s.lidar.params.range_min},
        {"range_max", s.lidar.params.range_max},
        {"noise_sigma", s.lidar.params.noise_sigma},
        {"rate_hz", s.lidar.rate_hz}}},
      {"sonar",
       {{"ring_radius_m", s.sonar_ring_radius_m},
        {"range_min", s.sonar.range_min},
        {"range_max", s.sonar.range_max},
        {"noise_sigma", s.sonar.noise_sigma}}},
      {"imu", {{"gyro_sigma", s.imu.gyro_sigma}, {"accel_sigma", s.imu.accel_sigma}}},
      {"map",
       {{"resolution_m", s.map.resolution_m},
        {"origin", pair(s.map.origin.x, s.map.origin.y)},
        {"width", s.map.width},
        {"height", s.map.height},
        {"pose_source", s.map.pose_source == MapPoseSource::Truth ? "truth" : "odometry"}}}};
  OJson rates = OJson::object();
  for (const auto& [topic, hz] : c.rates) rates[topic] = hz;
  j["rates"] = rates;
  j["limits"] = {{"cmd_vel_timeout_s", c.limits.cmd_vel_timeout_s},
                 {"joint_speed", arr(c.limits.joint_speed)},
                 {"min_move_duration_s", c.limits.min_move_duration_s},
                 {"plan_occupied_log_odds", c.limits.plan_occupied_log_odds}};
  j["network"] = {{"delay_s", c.network.delay_s},
                  {"jitter_s", c.network.jitter_s},
                  {"jitter_seed", c.network.jitter_seed},
                  {"queue_capacity", c.network.queue_capacity}};
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const StationConfig& config) { return hex64(fnv1a(config_to_json(config).dump())); }

std::string scenario_hash(std::string_view scenario_text) { return hex64(fnv1a(scenario_text)); }

}  // namespace mavi::teleop
