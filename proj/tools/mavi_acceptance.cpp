// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mavi/control.hpp"
#include "mavi/devicebus.hpp"
#include "mavi/locomotion.hpp"
#include "mavi/manipulator.hpp"
#include "mavi/ptru.hpp"
#include "mavi/simworld/grid.hpp"
#include "mavi/simworld/world.hpp"
#include "mavi/teleop/session.hpp"

using namespace mavi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string source_path(const std::string& rel) { return std::string(MAVI_SOURCE_DIR) + "/" + rel; }

double angle_err(double a, double b) { return std::abs(angle_diff(a, b)); }

// ---------------------------------------------------------------- kinematics

Outcome locomotion_consistency() {
  const auto t0 = Clock::now();
  const locomotion::ChassisGeometry c;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> v(-1.0, 1.0), w(-2.0, 2.0);
  double worst = 0.0;
  bool rotation_equal = true;
  for (int i = 0; i < 10'000; ++i) {
    const locomotion::BodyTwist t{v(rng), v(rng), w(rng)};
    const auto back = locomotion::twist_from_wheel_speeds(locomotion::wheel_speeds_from_twist(t, c), c);
    worst = std::max({worst, std::abs(back.vx_m_s - t.vx_m_s), std::abs(back.vy_m_s - t.vy_m_s),
                      std::abs(back.w_rad_s - t.w_rad_s)});
    const auto spin = locomotion::wheel_speeds_from_twist({0.0, 0.0, t.w_rad_s}, c);
    rotation_equal = rotation_equal && spin[0] == spin[1] && spin[1] == spin[2] && spin[2] == spin[3];
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-12 && rotation_equal && elapsed < 1.0,
          fmt("max round-trip error %.3g, pure rotation equal %s, %.3f s", worst, rotation_equal ? "yes" : "no",
              elapsed)};
}

Outcome odometry_closure() {
  const locomotion::ChassisGeometry c;
  constexpr double dt = 0.01;
  locomotion::Pose2D pose;
  auto hold = [&](const locomotion::BodyTwist& t, int steps) {
    const auto sensed = locomotion::apply_encoder_sign(locomotion::wheel_speeds_from_twist(t, c), c);
    for (int i = 0; i < steps; ++i) pose = locomotion::integrate_odometry(pose, sensed, dt, c);
  };
  for (int leg = 0; leg < 4; ++leg) {
    hold({0.5, 0.0, 0.0}, 200);
    hold({0.0, 0.0, kPi / 2.0}, 100);
  }
  const double dist = std::hypot(pose.x_m, pose.y_m);
  const double dh = angle_err(pose.heading_rad, 0.0);
  return {dist < 1e-9 && dh < 1e-9, fmt("closure %.3g m, %.3g rad", dist, dh)};
}

Outcome manipulator_round_trips() {
  const auto t0 = Clock::now();
  const manipulator::ManipulatorGeometry g;
  std::mt19937_64 rng(3);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  double worst_joint = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    manipulator::JointConfig q;
    q.lift_m = uni(g.lift_range_m.min, g.lift_range_m.max);
    q.theta_rad = {uni(-kPi, kPi), uni(1e-6, g.joint_limits_rad[1].max), uni(-kPi, kPi), uni(-1.5, 1.5),
                   uni(-kPi, kPi)};
    const auto back = manipulator::solve_ik(manipulator::forward_kinematics(q, g), g);
    worst_joint = std::max(worst_joint, std::abs(back.lift_m - q.lift_m));
    for (std::size_t j = 0; j < manipulator::kRevoluteJoints; ++j)
      worst_joint = std::max(worst_joint, angle_err(back.theta_rad[j], q.theta_rad[j]));
  }

  // With theta2 capped at 2.9 the planar reach runs from 2 l1 cos(2.9 / 2) to l1 + l2.
  const double reach = g.l(1) + g.l(2);
  const double folded = 2.0 * g.l(1) * std::cos(g.joint_limits_rad[1].max / 2.0);
  auto pose_at = [&](double d, double phi, double heading, double pitch, double lift, double roll) {
    const double wrist = g.wrist_reach(pitch);
    manipulator::EEPose p;
    p.x_m = g.l(0) + d * std::cos(phi) + wrist * std::cos(heading);
    p.y_m = d * std::sin(phi) + wrist * std::sin(heading);
    p.z_m = g.z_offset_m + lift + (g.l(4) + g.l(5)) * std::sin(pitch);
    p.pitch_rad = pitch;
    p.planar_heading_rad = heading;
    p.roll_rad = roll;
    return p;
  };
  double worst_pose = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const auto p = pose_at(uni(folded * 1.001, reach * 0.999), uni(-kPi, kPi), uni(-kPi, kPi), uni(-1.5, 1.5),
                           uni(g.lift_range_m.min, g.lift_range_m.max), uni(-kPi, kPi));
    const auto f = manipulator::forward_kinematics(manipulator::solve_ik(p, g), g);
    worst_pose = std::max({worst_pose, std::abs(f.x_m - p.x_m), std::abs(f.y_m - p.y_m), std::abs(f.z_m - p.z_m),
                           angle_err(f.pitch_rad, p.pitch_rad),
                           angle_err(f.planar_heading_rad, p.planar_heading_rad),
                           angle_err(f.roll_rad, p.roll_rad)});
  }

  int probe_mismatch = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool outside = i % 2 == 1;
    const double d = reach * (outside ? 1.0 + 1e-6 : 1.0 - 1e-6);
    const auto p = pose_at(d, uni(-kPi, kPi), uni(-kPi, kPi), uni(-1.5, 1.5), 0.7, 0.0);
    bool rejected = false;
    try {
      manipulator::solve_ik(p, g);
    } catch (const manipulator::UnreachablePose&) {
      rejected = true;
    }
    if (rejected != outside) ++probe_mismatch;
  }
  const double elapsed = seconds_since(t0);
  return {worst_joint < 1e-9 && worst_pose < 1e-9 && probe_mismatch == 0 && elapsed < 5.0,
          fmt("IK(FK) %.3g, FK(IK) %.3g, boundary mismatches %d/1000, %.3f s", worst_joint, worst_pose,
              probe_mismatch, elapsed)};
}

Outcome ptru_conversions() {
  std::mt19937_64 rng(4);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const double tilt_max = 85.0 * kPi / 180.0;
  double worst = 0.0;
  bool sign_exact = true;
  for (int i = 0; i < 10'000; ++i) {
    const ptru::PTRUAngles a{uni(-kPi, kPi), uni(-tilt_max, tilt_max), uni(-kPi, kPi)};
    const auto q = ptru::quaternion_from_ptru_angles(a);
    const auto b = ptru::ptru_angles_from_quaternion(q);
    worst = std::max({worst, angle_err(b.pan_rad, a.pan_rad), angle_err(b.tilt_rad, a.tilt_rad),
                      angle_err(b.roll_rad, a.roll_rad)});
    sign_exact = sign_exact && ptru::ptru_angles_from_quaternion(-q) == b;
  }
  const auto id = ptru::ptru_angles_from_quaternion(ptru::Quaternion::identity());
  const auto yaw = ptru::ptru_angles_from_quaternion(ptru::Quaternion::from_axis_angle(0, 0, 1, kPi / 2.0));
  const double spot = std::max({std::abs(id.pan_rad), std::abs(id.tilt_rad), std::abs(id.roll_rad),
                                std::abs(yaw.pan_rad - kPi / 2.0), std::abs(yaw.tilt_rad), std::abs(yaw.roll_rad)});
  return {worst < 1e-9 && sign_exact && spot < 1e-12,
          fmt("round trip %.3g, q/-q exact %s, spot values %.3g", worst, sign_exact ? "yes" : "no", spot)};
}

// ---------------------------------------------------------------- bus

Outcome bus_contract() {
  using namespace devicebus;
  std::mt19937_64 rng(5);
  int bad_frames = 0;
  for (int i = 0; i < 10'000; ++i) {
    BusFrame f;
    f.device_id = static_cast<std::uint8_t>(rng() % 255);
    static constexpr Instruction kinds[] = {Instruction::Ping, Instruction::Read, Instruction::Write,
                                            Instruction::Status};
    f.instruction = kinds[rng() % 4];
    f.payload.resize(rng() % (kMaxPayload + 1));
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
    const Bytes wire = encode_frame(f);
    const auto r = decode_frame(wire);
    if (!r.ok() || !(*r.frame == f) || r.consumed != wire.size() || r.skipped != 0) ++bad_frames;
  }
  const bool ping_exact =
      encode_frame({3, Instruction::Ping, {}}) == Bytes{0xFF, 0xFF, 0x03, 0x02, 0x01, 0xF9};

  // Five read-only modules whose transactions sum to exactly B bytes.
  int law_mismatch = 0;
  const std::size_t fixed = 5 * 2 * kFrameOverhead;
  for (std::size_t bytes = 950; bytes <= 1050; ++bytes) {
    Registry reg;
    std::size_t left = bytes - fixed;
    std::vector<std::size_t> sizes;
    for (int m = 0; m < 5; ++m) {
      const auto parts = static_cast<std::size_t>(5 - m);
      const std::size_t take = (left + parts - 1) / parts;
      sizes.push_back(take);
      left -= take;
      reg.register_module({static_cast<std::uint8_t>(60 + m), ModuleKind::ForceSensor, take, 0, kCycleHz});
    }
    DeviceCommunicationManager dcm(reg);
    for (int m = 0; m < 5; ++m) {
      const auto id = static_cast<std::uint8_t>(60 + m);
      dcm.attach(id, std::make_shared<EmulatedDevice>(id, sizes[m]));
    }
    const auto report = dcm.run_cycle();
    const bool expected = bytes * 10 > 10'000;
    if (report.bytes_on_wire != bytes || report.overrun != expected || CycleReport::overrun_law(bytes) != expected)
      ++law_mismatch;
  }
  const double util = bus_utilization(default_registry());
  return {bad_frames == 0 && ping_exact && law_mismatch == 0 && util < 1.0,
          fmt("frame failures %d/10000, PING exact %s, law mismatches %d/101 (950..1050 B), utilization %.4f",
              bad_frames, ping_exact ? "yes" : "no", law_mismatch, util)};
}

// ---------------------------------------------------------------- sim

constexpr double kBlocked = 0.5;

double dijkstra_cost(const simworld::OccupancyGrid& g, simworld::Cell s, simworld::Cell t) {
  using simworld::Cell;
  std::vector<double> dist(g.cells().size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.index(s)] = 0.0;
  pq.push({0.0, g.index(s)});
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const Cell c = g.cell_at(i);
    if (c == t) return d;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const Cell nb{c.x + dx, c.y + dy};
        if (!simworld::is_free(g, nb, kBlocked)) continue;
        if (dx && dy &&
            (!simworld::is_free(g, {c.x + dx, c.y}, kBlocked) || !simworld::is_free(g, {c.x, c.y + dy}, kBlocked)))
          continue;
        const double nd = d + ((dx && dy) ? std::sqrt(2.0) : 1.0);
        if (nd < dist[g.index(nb)]) {
          dist[g.index(nb)] = nd;
          pq.push({nd, g.index(nb)});
        }
      }
  }
  return std::numeric_limits<double>::infinity();
}

Outcome sim_geometry() {
  auto world = simworld::load_scenario(teleop::read_file(source_path("scenarios/room4x4.scn")));
  simworld::LidarParams lp;
  lp.angle_min = 0.0;
  const auto scan = simworld::raycast_lidar(world, lp);
  const double e0 = std::abs(scan.ranges_m[0] - 2.0);
  const double e45 = std::abs(scan.ranges_m[45] - 2.0 * std::sqrt(2.0));

  std::mt19937_64 rng(6);
  std::bernoulli_distribution block(0.25);
  int mismatches = 0, solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    simworld::OccupancyGrid g(0.1, {0, 0}, 64, 64);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (block(rng)) g.set({x, y}, 5.0);
    const simworld::Cell s{static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)};
    const simworld::Cell t{static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)};
    g.set(s, 0.0);
    g.set(t, 0.0);
    const double oracle = dijkstra_cost(g, s, t);
    double cost = std::numeric_limits<double>::infinity();
    try {
      cost = simworld::plan_path(g, s, t, kBlocked).cost;
      ++solved;
    } catch (const simworld::PlanError&) {
    }
    if (std::isinf(oracle) != std::isinf(cost) || (std::isfinite(oracle) && std::abs(oracle - cost) > 1e-9))
      ++mismatches;
  }
  return {e0 < 1e-9 && e45 < 1e-9 && mismatches == 0,
          fmt("beam(0) err %.3g, beam(45) err %.3g, A* vs Dijkstra mismatches %d/100 (%d solvable)", e0, e45,
              mismatches, solved)};
}

// ---------------------------------------------------------------- station

void run_script(teleop::Session& session, const std::string& script, std::uint64_t ticks,
                const std::function<void()>& after_tick = {}) {
  teleop::ScriptPlayer player(teleop::parse_script(teleop::read_file(source_path(script))));
  for (std::uint64_t k = 0; k < ticks; ++k) {
    player.pump(session);
    session.tick();
    if (after_tick) after_tick();
  }
  player.pump(session);
}

bool on_wall(const simworld::OccupancyGrid& g, simworld::Cell c, const std::vector<simworld::Segment>& walls) {
  const auto p = g.center_of(c);
  for (const auto& w : walls)
    if (simworld::point_segment_distance(p, w) < 1e-9) return true;
  return false;
}

Outcome mapping() {
  const teleop::StationConfig config;
  const std::string scenario = teleop::read_file(source_path("scenarios/room4x4.scn"));
  teleop::Session session(config, scenario);
  const auto& station = session.station();
  const auto& grid = station.map();
  std::vector<std::uint8_t> traversed(grid.cells().size(), 0);
  run_script(session, "scenarios/room_coverage.ndjson", 40 * teleop::kTickHz, [&] {
    const auto& pose = station.world().robot.pose;
    const auto c = grid.cell_of({pose.x_m, pose.y_m});
    if (grid.in_bounds(c)) traversed[grid.index(c)] = 1;
  });

  const auto& walls = station.world().walls;
  int wall_cells = 0, wall_bad = 0, path_cells = 0, path_bad = 0;
  for (std::size_t i = 0; i < grid.cells().size(); ++i) {
    const auto c = grid.cell_at(i);
    if (on_wall(grid, c, walls)) {
      ++wall_cells;
      if (!(grid.log_odds(c) > 0.0)) ++wall_bad;
    } else if (traversed[i]) {
      ++path_cells;
      if (!(grid.log_odds(c) < 0.0)) ++path_bad;
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / ("mavi_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "map").string();
  simworld::export_map(grid, prefix);
  const std::string pgm = teleop::read_file(prefix + ".pgm");
  const std::string yaml = teleop::read_file(prefix + ".yaml");
  std::filesystem::remove_all(dir);

  std::istringstream head(pgm);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  head >> magic >> w >> h >> maxval;
  const std::size_t header_len = static_cast<std::size_t>(head.tellg()) + 1;
  const auto& m = config.sensors.map;
  double res = 0.0;
  int yw = 0, yh = 0;
  std::istringstream side(yaml);
  for (std::string line; std::getline(side, line);) {
    if (line.rfind("resolution:", 0) == 0) res = std::stod(line.substr(11));
    if (line.rfind("width:", 0) == 0) yw = std::stoi(line.substr(6));
    if (line.rfind("height:", 0) == 0) yh = std::stoi(line.substr(7));
  }
  const bool export_ok = magic == "P5" && w == m.width && h == m.height && maxval == 255 &&
                         pgm.size() == header_len + static_cast<std::size_t>(w) * h && res == m.resolution_m &&
                         yw == m.width && yh == m.height;
  return {wall_cells > 0 && wall_bad == 0 && path_cells > 0 && path_bad == 0 && export_ok,
          fmt("wall cells not occupied %d/%d, traversed cells not free %d/%d, export %dx%d @ %.9g m %s", wall_bad,
              wall_cells, path_bad, path_cells, w, h, res, export_ok ? "matches" : "MISMATCH")};
}

struct DoorwayRun {
  double wall_s = 0.0;
  teleop::SessionLog log;
  teleop::ReplayReport report;
  std::uint64_t errors = 0;
  double final_x = 0.0;
};

const DoorwayRun& doorway_run() {
  static const DoorwayRun run = [] {
    DoorwayRun r;
    const auto t0 = Clock::now();
    const teleop::StationConfig config;
    const std::string scenario = teleop::read_file(source_path("scenarios/doorway.scn"));
    std::ostringstream recorded;
    {
      teleop::Session session(config, scenario);
      session.record_to(&recorded);
      run_script(session, "scenarios/doorway_session.ndjson", 30 * teleop::kTickHz);
      session.finish();
      r.errors = session.station().published("error");
      r.final_x = session.station().world().robot.pose.x_m;
    }
    r.log = teleop::parse_session(recorded.str());
    r.report = teleop::replay_session(r.log, config, scenario);
    r.wall_s = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome determinism() {
  const auto& r = doorway_run();
  const double virtual_s = static_cast<double>(r.log.ticks) / teleop::kTickHz;
  const bool same = r.report.status == teleop::ReplayStatus::Match &&
                    r.report.recorded_hashes == r.report.replayed_hashes && !r.report.recorded_hashes.empty();
  // The run is only meaningful if it crossed the doorway and the pick pose was accepted.
  const bool scenario_ok = r.errors == 0 && r.final_x > 0.5;
  return {same && virtual_s == 30.0 && r.wall_s < 60.0 && scenario_ok,
          fmt("replay %s over %zu topics, %.2f s virtual, %.2f s wall, final x %.3f m, %llu errors",
              teleop::to_string(r.report.status).c_str(), r.report.recorded_hashes.size(), virtual_s, r.wall_s,
              r.final_x, static_cast<unsigned long long>(r.errors))};
}

Outcome rate_contract() {
  const auto& r = doorway_run();
  std::map<std::string, std::size_t> count;
  for (const auto& line : r.log.outbound) count[teleop::decode_envelope(line).topic]++;
  const std::size_t joints = count["joint_states"], camera = count["camera_pose"], deltas = count["map_delta"];
  return {joints == 3000 && camera == 900 && deltas <= 300,
          fmt("joint_states %zu, camera_pose %zu, map_delta %zu", joints, camera, deltas)};
}

Outcome latency_compensation() {
  teleop::StationConfig config;
  config.network.delay_s = 0.1;
  const std::string scenario = teleop::read_file(source_path("scenarios/room4x4.scn"));
  teleop::Session session(config, scenario);
  const auto& station = session.station();
  control::ControllerState shadow = station.controller();
  shadow.ptru_latency_estimate_s = 0.0;

  constexpr double rate = 0.1;
  double err_comp = 0.0, err_base = 0.0;
  int samples = 0;
  std::uint64_t seq = 0;
  for (int k = 0; k < 10 * teleop::kTickHz; ++k) {
    const double t = station.now_s();
    const double yaw = rate * t;
    const teleop::Json q = teleop::Json::array({std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)});
    session.submit({"cmd_head", 0.0, seq++, teleop::Json{{"orientation", q}}});
    session.tick();
    const double baseline = control::ptru_step(shadow, station.head_history(), 1.0 / teleop::kTickHz).pan_rad;
    if (t > 2.0) {
      err_comp += std::abs(station.controller().last_ptru_command.pan_rad - yaw);
      err_base += std::abs(baseline - yaw);
      ++samples;
    }
  }
  err_comp /= samples;
  err_base /= samples;
  const double reduction = err_base > 0.0 ? 1.0 - err_comp / err_base : 0.0;
  return {reduction >= 0.9, fmt("mean pan error %.3g rad compensated vs %.3g rad baseline, reduction %.2f%%",
                                err_comp, err_base, 100.0 * reduction)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"locomotion-consistency", locomotion_consistency},
      {"odometry-closure", odometry_closure},
      {"manipulator-round-trips", manipulator_round_trips},
      {"ptru-conversions", ptru_conversions},
      {"bus-contract", bus_contract},
      {"sim-geometry", sim_geometry},
      {"mapping", mapping},
      {"end-to-end-determinism", determinism},
      {"rate-contract", rate_contract},
      {"latency-compensation", latency_compensation},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << std::setw(2) << index << " " << std::left << std::setw(24)
              << c.name << std::right << " " << o.detail << std::endl;
  }
  std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
