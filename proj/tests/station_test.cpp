#include <gtest/gtest.h>

#include <sstream>

#include "mavi/teleop/session.hpp"

using namespace mavi;
using namespace mavi::teleop;

namespace {

std::string scenario(const std::string& name) {
  return read_file(std::string(MAVI_SOURCE_DIR) + "/scenarios/" + name);
}

struct Capture {
  std::vector<Envelope> all;
  std::vector<Envelope> of(const std::string& topic) const {
    std::vector<Envelope> out;
    for (const auto& e : all)
      if (e.topic == topic) out.push_back(e);
    return out;
  }
  const Envelope* last(const std::string& topic) const {
    for (auto it = all.rbegin(); it != all.rend(); ++it)
      if (it->topic == topic) return &*it;
    return nullptr;
  }
};

struct Rig {
  explicit Rig(StationConfig c = {}, const std::string& scn = "room4x4.scn")
      : session(std::move(c), scenario(scn)) {
    session.add_listener([this](const Envelope& e, const std::string&) { cap.all.push_back(e); });
  }
  Station& st() { return session.station(); }
  void run(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) session.tick();
  }
  Envelope send(const std::string& topic, Json payload) { return session.submit({topic, 0.0, 0, std::move(payload)}); }
  Session session;
  Capture cap;
};

Json twist(double vx, double vy, double w) { return {{"vx", vx}, {"vy", vy}, {"w", w}}; }

Json ee(const manipulator::EEPose& p) {
  return {{"x", p.x_m},         {"y", p.y_m},
          {"z", p.z_m},         {"pitch", p.pitch_rad},
          {"heading", p.planar_heading_rad}, {"roll", p.roll_rad}};
}

}  // namespace

TEST(Scheduler, DueTicksSpreadRatesEvenly) {
  for (int rate : {0, 1, 10, 20, 30, 33, 50, 100}) {
    int n = 0;
    for (std::uint64_t k = 1; k <= 3000; ++k) n += due_on_tick(k, rate);
    EXPECT_EQ(n, 30 * rate) << rate;
  }
  EXPECT_FALSE(due_on_tick(0, 100));
}

TEST(Station, IdleTelemetryFlowsAtConfiguredRates) {
  Rig r;
  r.run(100);
  const auto& rates = r.st().config().rates;
  for (const auto& [topic, hz] : rates) {
    if (topic == "map_delta") {
      EXPECT_LE(r.cap.of(topic).size(), 10u);
    } else {
      EXPECT_EQ(r.cap.of(topic).size(), static_cast<std::size_t>(hz)) << topic;
    }
  }
  EXPECT_TRUE(r.cap.of("error").empty());
}

TEST(Station, SeqIsGaplessAndStampsMonotonePerTopic) {
  Rig r;
  r.run(250);
  std::map<std::string, std::pair<std::uint64_t, double>> last;
  for (const auto& e : r.cap.all) {
    auto [it, fresh] = last.try_emplace(e.topic, e.seq, e.stamp_s);
    if (fresh) {
      EXPECT_EQ(e.seq, 0u) << e.topic;
      continue;
    }
    EXPECT_EQ(e.seq, it->second.first + 1) << e.topic;
    EXPECT_GE(e.stamp_s, it->second.second) << e.topic;
    it->second = {e.seq, e.stamp_s};
  }
}

TEST(Station, EveryPublishedPayloadValidates) {
  Rig r;
  r.send("cmd_vel", twist(0.2, 0.1, 0.3));
  r.send("cmd_ee_preview", ee({0.4, 0.0, 0.7, 0, 0, 0}));
  r.send("cmd_goal", {{"x", 1.0}, {"y", 0.0}});
  r.run(120);
  for (const auto& e : r.cap.all) {
    const TopicSpec* entry = find_topic(e.topic);
    ASSERT_NE(entry, nullptr) << e.topic;
    EXPECT_EQ(entry->direction, Direction::Telemetry);
    const Envelope back = decode_envelope(encode_envelope(e));
    EXPECT_EQ(back.topic, e.topic);
  }
}

// Speeds ramp up and down symmetrically under the acceleration limit, so a
// 1 s command at 0.2 m/s resent inside the watchdog window nets exactly 0.2 m.
TEST(Station, DriveOneSecondMovesTwentyCentimetres) {
  Rig r;
  for (int i = 0; i < 100; ++i) {
    if (i % 10 == 0) r.send("cmd_vel", twist(0.2, 0, 0));
    r.run(1);
  }
  const double x_at_1s = r.cap.last("pose2d")->payload["x"].get<double>();
  EXPECT_GT(x_at_1s, 0.18);
  EXPECT_LE(x_at_1s, 0.2);
  r.send("cmd_vel", twist(0, 0, 0));
  r.run(100);
  const Json& p = r.cap.last("pose2d")->payload;
  EXPECT_NEAR(p["x"].get<double>(), 0.2, 1e-9);
  EXPECT_NEAR(p["y"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(p["odom_x"].get<double>(), 0.2, 1e-9);
}

TEST(Station, CmdVelWatchdogStopsTheBase) {
  Rig r;
  r.send("cmd_vel", twist(0.2, 0, 0));
  r.run(200);
  const Json& p = r.cap.last("pose2d")->payload;
  EXPECT_EQ(p["vx"].get<double>(), 0.0);
  // Ticks starting at 0 .. 0.5 s inclusive still see the command: 51 ticks at
  // 0.2 m/s, and the ramps up and down cancel.
  EXPECT_NEAR(p["x"].get<double>(), 51 * 0.2 * 0.01, 1e-9);
}

TEST(Station, UnreachablePoseReportsError) {
  Rig r;
  const Envelope sent = r.send("cmd_ee_pose", ee({5.0, 0.0, 0.7, 0, 0, 0}));
  r.run(1);
  const Envelope* err = r.cap.last("error");
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->payload["code"], "unreachable-pose");
  EXPECT_EQ(err->payload["topic"], "cmd_ee_pose");
  EXPECT_EQ(err->payload["seq"].get<std::uint64_t>(), sent.seq);
}

TEST(Station, ReachablePoseConvergesToIkSolution) {
  Rig r;
  const auto& geom = r.st().config().manipulator;
  manipulator::JointConfig target;
  target.lift_m = 0.7;
  target.theta_rad = {0.3, 0.8, -0.9, 0.4, 0.2};
  const auto pose = manipulator::forward_kinematics(target, geom);
  const auto expect = manipulator::solve_ik(pose, geom);

  r.send("cmd_ee_preview", ee(pose));
  r.run(1);
  const Envelope* preview = r.cap.last("ik_preview");
  ASSERT_NE(preview, nullptr);
  EXPECT_TRUE(preview->payload["reachable"].get<bool>());
  EXPECT_NEAR(preview->payload["joints"]["lift"].get<double>(), expect.lift_m, 1e-9);

  r.send("cmd_ee_pose", ee(pose));
  r.run(600);
  const Json& js = r.cap.last("joint_states")->payload;
  EXPECT_FALSE(js["moving"].get<bool>());
  EXPECT_NEAR(js["lift"].get<double>(), expect.lift_m, 1e-6);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(js["theta"][i].get<double>(), expect.theta_rad[i], 1e-6) << i;
  EXPECT_TRUE(r.cap.of("error").empty());
}

TEST(Station, JointTrajectoryRunsAndRejectsBadKnots) {
  Rig r;
  r.send("cmd_joint_traj",
         {{"knots", Json::array({{{"t", 1.0}, {"lift", 0.8}, {"theta", {0.5, 0, 0, 0, 0}}}})}});
  r.run(300);
  EXPECT_NEAR(r.cap.last("joint_states")->payload["theta"][0].get<double>(), 0.5, 1e-6);
  r.send("cmd_joint_traj", {{"knots", Json::array({{{"t", 1.0}, {"lift", 9.0}, {"theta", {0, 0, 0, 0, 0}}}})}});
  r.send("cmd_joint_traj", {{"knots", Json::array({{{"t", 1.0}}})}});
  r.run(1);
  const auto errs = r.cap.of("error");
  ASSERT_EQ(errs.size(), 2u);
  EXPECT_EQ(errs[0].payload["code"], "joint-limit");
  EXPECT_EQ(errs[1].payload["code"], "invalid-trajectory");
}

TEST(Station, CommandValidationErrors) {
  Rig r;
  r.send("cmd_head", {{"orientation", {0.9, 0, 0, 0}}});
  r.send("pose2d", {});
  r.send("cmd_vel", {{"vx", 1}});
  r.send("cmd_gripper", {{"width", 0.02}, {"payload_kg", 5.0}});
  r.send("cmd_gripper", {{"width", 0.02}, {"target", "tail"}});
  r.send("no_such_topic", {});
  r.run(1);
  std::vector<std::string> codes;
  for (const auto& e : r.cap.of("error")) codes.push_back(e.payload["code"]);
  EXPECT_EQ(codes, (std::vector<std::string>{"not-a-command", "invalid-payload", "unknown-topic", "invalid-quaternion",
                                             "payload-limit", "invalid-command"}));
}

TEST(Station, GripperAndBaselineCommands) {
  Rig r;
  r.send("cmd_gripper", {{"width", 0.03}});
  r.send("cmd_gripper", {{"width", 1.0}, {"target", "base"}});
  r.send("cmd_baseline", {{"mm", 100.0}});
  r.run(300);
  const Json& js = r.cap.last("joint_states")->payload;
  EXPECT_NEAR(js["gripper"].get<double>(), manipulator::gripper_target(0.03, r.st().config().manipulator), 1e-6);
  EXPECT_NEAR(js["base_gripper"].get<double>(), r.st().config().base_gripper_max_m, 1e-6);
  EXPECT_DOUBLE_EQ(r.cap.last("ptru_state")->payload["baseline_mm"].get<double>(),
                   ptru::kBaselineNominalMm + ptru::kBaselineAdjustMm);
}

TEST(Station, HeadCommandSteersThePtru) {
  Rig r;
  const double yaw = 0.4;
  r.send("cmd_head", {{"orientation", {std::cos(yaw / 2), 0, 0, std::sin(yaw / 2)}}});
  r.run(100);
  EXPECT_NEAR(r.cap.last("ptru_state")->payload["pan"].get<double>(), yaw, 1e-6);
}

TEST(Station, GoalPlanningOnTheLiveMap) {
  Rig r;
  r.run(100);
  r.send("cmd_goal", {{"x", 1.0}, {"y", 0.0}});
  r.send("cmd_goal", {{"x", 2.0}, {"y", 0.0}});
  r.run(1);
  const Envelope* path = r.cap.last("path");
  ASSERT_NE(path, nullptr);
  EXPECT_NEAR(path->payload["cost"].get<double>(), 1.0, 0.05 + 1e-9);
  const Envelope* err = r.cap.last("error");
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->payload["code"], "goal-occupied");
}

TEST(Station, MapDeltaCarriesOnlyChangedCells) {
  Rig r;
  r.run(300);
  const auto deltas = r.cap.of("map_delta");
  ASSERT_FALSE(deltas.empty());
  EXPECT_LE(deltas.size(), 30u);
  std::vector<int> painted(241 * 241, simworld::pgm_value(0.0));
  for (const auto& d : deltas) {
    for (const auto& c : d.payload["cells"]) {
      const auto idx = c[0].get<std::size_t>();
      EXPECT_NE(painted[idx], c[1].get<int>());
      painted[idx] = c[1].get<int>();
    }
  }
  const auto& grid = r.st().map();
  for (std::size_t i = 0; i < grid.cells().size(); ++i)
    ASSERT_EQ(painted[i], simworld::pgm_value(grid.cells()[i])) << i;
}

TEST(Station, BusCycleTelemetry) {
  Rig r;
  r.run(10);
  const Json& b = r.cap.last("bus_cycle")->payload;
  EXPECT_FALSE(b["overrun"].get<bool>());
  EXPECT_GT(b["utilization"].get<double>(), 0.0);
  EXPECT_LT(b["utilization"].get<double>(), 1.0);
  EXPECT_EQ(b["timeouts"].get<int>(), 0);
  EXPECT_EQ(b["budget_bits"].get<int>(), 10000);
}

// ---------------------------------------------------------------- latency

TEST(Latency, ZeroDelayDeliversOnTheNextTick) {
  Rig r;
  r.send("cmd_baseline", {{"mm", 62.0}});
  EXPECT_EQ(r.st().delivered(), 0u);
  r.run(1);
  EXPECT_EQ(r.st().delivered(), 1u);
}

TEST(Latency, FixedDelayHoldsCommandsBack) {
  StationConfig c;
  c.network.delay_s = 0.1;
  Rig r(c);
  r.run(5);
  r.send("cmd_baseline", {{"mm", 62.0}});
  r.run(10);
  EXPECT_EQ(r.st().delivered(), 0u);
  r.run(1);
  EXPECT_EQ(r.st().delivered(), 1u);
}

TEST(Latency, NegativeDelayRejected) {
  EXPECT_THROW(LatencyModel(-0.1, 0.0, 1), InvalidArgument);
  EXPECT_THROW(LatencyModel(0.1, -0.1, 1), InvalidArgument);
  StationConfig c;
  c.network.delay_s = -0.1;
  EXPECT_THROW(Station(c, simworld::parse_scenario(scenario("room4x4.scn"))), ConfigError);
}

TEST(Latency, JitterIsSeededAndKeepsTopicOrder) {
  LatencyModel a(0.05, 0.05, 42), b(0.05, 0.05, 42), c(0.05, 0.05, 43);
  bool differs = false;
  std::int64_t prev = 0;
  for (std::int64_t t = 0; t < 100'000; t += 10'000) {
    const auto da = a.delivery_us("cmd_head", t);
    EXPECT_EQ(da, b.delivery_us("cmd_head", t));
    differs = differs || da != c.delivery_us("cmd_head", t);
    EXPECT_GE(da, prev);
    EXPECT_GE(da, t + 50'000);
    EXPECT_LE(da, std::max(prev, t + 100'000));
    prev = da;
  }
  EXPECT_TRUE(differs);
}

// ---------------------------------------------------------------- record / replay

namespace {

// Drive, pick pose and head sweep inside the room.
void scripted(Session& s, std::uint64_t ticks) {
  for (std::uint64_t k = 0; k < ticks; ++k) {
    const double t = s.station().now_s();
    if (k % 10 == 0) s.submit({"cmd_vel", 0, k, twist(k < 150 ? 0.2 : 0.0, 0.05, 0.1)});
    if (k == 50) s.submit({"cmd_ee_pose", 0, 0, ee({0.4, 0.0, 0.7, 0, 0, 0})});
    const double yaw = 0.2 * t;
    s.submit({"cmd_head", 0, k, {{"orientation", {std::cos(yaw / 2), 0, 0, std::sin(yaw / 2)}}}});
    s.tick();
  }
  s.finish();
}

std::string record(const StationConfig& c, std::uint64_t ticks) {
  std::ostringstream log;
  Session s(c, scenario("room4x4.scn"));
  s.record_to(&log);
  scripted(s, ticks);
  return log.str();
}

}  // namespace

TEST(Replay, RecordedSessionReplaysIdentically) {
  const StationConfig c;
  const SessionLog log = parse_session(record(c, 300));
  EXPECT_EQ(log.ticks, 300u);
  EXPECT_EQ(log.inbound.size(), 331u);
  const auto rep = replay_session(log, c, scenario("room4x4.scn"));
  EXPECT_EQ(rep.status, ReplayStatus::Match) << rep.message;
  EXPECT_EQ(rep.recorded_hashes, rep.replayed_hashes);
  EXPECT_FALSE(rep.first_divergence);
}

TEST(Replay, IdentityChecks) {
  const StationConfig c;
  const SessionLog log = parse_session(record(c, 20));
  StationConfig other;
  other.limits.cmd_vel_timeout_s = 0.4;
  EXPECT_EQ(replay_session(log, other, scenario("room4x4.scn")).status, ReplayStatus::ConfigMismatch);
  EXPECT_EQ(replay_session(log, c, scenario("doorway.scn")).status, ReplayStatus::ScenarioMismatch);
  EXPECT_EQ(replay_session(log, c, scenario("room4x4.scn"), 8).status, ReplayStatus::SeedMismatch);
}

TEST(Replay, ForcedDifferentSeedDivergesWhenNoiseIsOn) {
  StationConfig c;
  c.sensors.lidar.params.noise_sigma = 0.01;
  const SessionLog log = parse_session(record(c, 100));
  const auto rep = replay_session(log, c, scenario("room4x4.scn"), 8, true);
  ASSERT_EQ(rep.status, ReplayStatus::Divergence) << rep.message;
  EXPECT_NE(rep.recorded_hashes, rep.replayed_hashes);
  // Lidar noise first shows on the first scan (tick 10).
  EXPECT_EQ(rep.first_divergence->topic, "scan");
  EXPECT_EQ(rep.first_divergence->seq, 0u);
}

TEST(Replay, EditedCommandDivergesAtFirstAffectedEnvelope) {
  const StationConfig c;
  std::string text = record(c, 300);
  // Change the cmd_vel sent at t = 1.0 s.
  const std::string needle = R"("topic":"cmd_vel","stamp":1.0,"seq":100,"payload":{"vx":0.2)";
  const auto at = text.find(needle);
  ASSERT_NE(at, std::string::npos);
  text.replace(at, needle.size(), R"("topic":"cmd_vel","stamp":1.0,"seq":100,"payload":{"vx":0.3)");
  const auto rep = replay_session(parse_session(text), c, scenario("room4x4.scn"));
  ASSERT_EQ(rep.status, ReplayStatus::Divergence);
  const auto& d = *rep.first_divergence;
  // Delivered on the tick starting at 1.0 s; first output is stamped 1.01 s.
  EXPECT_NEAR(d.stamp_s, 1.01, 1e-12);
  EXPECT_FALSE(d.recorded.empty());
  EXPECT_FALSE(d.replayed.empty());
  EXPECT_NE(d.recorded, d.replayed);
}
