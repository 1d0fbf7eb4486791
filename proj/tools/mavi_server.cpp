// Robot-side teleoperation station: live server, headless scripted runs and
// session replay.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "mavi/simworld/grid.hpp"
#include "mavi/teleop/server.hpp"

using namespace mavi;
using namespace mavi::teleop;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int replay(const SessionLog& log, const StationConfig& config, const std::string& scenario_text,
           std::optional<std::uint64_t> seed, bool force) {
  const ReplayReport r = replay_session(log, config, scenario_text, seed, force);
  std::cout << "replay: " << to_string(r.status) << " - " << r.message << "\n";
  if (r.status != ReplayStatus::Match && r.status != ReplayStatus::Divergence) return 3;
  std::cout << std::left << std::setw(16) << "topic" << std::setw(18) << "recorded" << "replayed\n";
  std::map<std::string, int> topics;
  for (const auto& [t, _] : r.recorded_hashes) topics[t];
  for (const auto& [t, _] : r.replayed_hashes) topics[t];
  for (const auto& [t, _] : topics) {
    const auto a = r.recorded_hashes.count(t) ? r.recorded_hashes.at(t) : "-";
    const auto b = r.replayed_hashes.count(t) ? r.replayed_hashes.at(t) : "-";
    std::cout << std::setw(16) << t << std::setw(18) << a << b << (a == b ? "" : "  <>") << "\n";
  }
  if (r.first_divergence) {
    const auto& d = *r.first_divergence;
    std::cout << "first divergence: topic " << d.topic << " seq " << d.seq << " stamp " << d.stamp_s << "\n"
              << "  recorded: " << (d.recorded.empty() ? "(none)" : d.recorded) << "\n"
              << "  replayed: " << (d.replayed.empty() ? "(none)" : d.replayed) << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAVI teleoperation station"};
  std::string config_path, scenario_path, listen = "127.0.0.1:8765", record_path, replay_path, script_path,
                                          export_prefix;
  double rate_scale = 1.0;
  double duration_s = 0.0;
  std::optional<double> latency_s;
  std::optional<std::uint64_t> seed;
  bool headless = false, force = false, dump_schema = false, dump_config = false;

  app.add_option("--config", config_path, "JSON station config (defaults when omitted)")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario_path, "World scenario file")->check(CLI::ExistingFile);
  app.add_option("--listen", listen, "host:port for TCP and WebSocket clients");
  app.add_option("--rate-scale", rate_scale, "Virtual seconds per wall second; 0 runs unpaced")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--record", record_path, "Write the session log here");
  app.add_option("--replay", replay_path, "Verify a recorded session log and exit")->check(CLI::ExistingFile);
  app.add_option("--latency", latency_s, "One-way command delay in seconds (overrides network.delay_s)");
  app.add_option("--seed", seed, "Override the scenario noise seed");
  app.add_option("--duration", duration_s, "Stop after this much virtual time (0 = until interrupted)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--headless", headless, "Run without listening (needs --duration or --script)");
  app.add_option("--script", script_path, "NDJSON command script fed at its virtual times")->check(CLI::ExistingFile);
  app.add_option("--export-map", export_prefix, "Write <prefix>.pgm and <prefix>.yaml on exit");
  app.add_flag("--force", force, "Replay even if the seed differs from the log");
  app.add_flag("--dump-schema", dump_schema, "Print the topic schema and exit");
  app.add_flag("--dump-config", dump_config, "Print the effective config and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_schema) {
      std::cout << schema_json().dump(2) << "\n";
      return 0;
    }
    StationConfig config = config_path.empty() ? StationConfig{} : load_config_file(config_path);
    if (latency_s) config.network.delay_s = *latency_s;
    validate_config(config);
    if (dump_config) {
      std::cout << config_to_json(config).dump(2) << "\n";
      return 0;
    }
    if (scenario_path.empty()) {
      std::cerr << "error: --scenario is required\n";
      return 1;
    }
    const std::string scenario_text = read_file(scenario_path);

    if (!replay_path.empty()) return replay(load_session(replay_path), config, scenario_text, seed, force);

    Session session(config, scenario_text, seed);
    std::ofstream record;
    if (!record_path.empty()) {
      record.open(record_path, std::ios::binary);
      if (!record) throw std::runtime_error("cannot write " + record_path);
      session.record_to(&record);
    }
    std::optional<ScriptPlayer> script;
    if (!script_path.empty()) script.emplace(parse_script(read_file(script_path)));

    std::uint64_t total_ticks = 0;
    if (duration_s > 0) {
      total_ticks = static_cast<std::uint64_t>(std::llround(duration_s * kTickHz));
    } else if (headless && script) {
      total_ticks = static_cast<std::uint64_t>(std::llround(script->last_time_s() * kTickHz)) + kTickHz;
    } else if (headless) {
      std::cerr << "error: --headless needs --duration or --script\n";
      return 1;
    }

    std::unique_ptr<TeleopServer> server;
    if (!headless) {
      server = std::make_unique<TeleopServer>(session, parse_listen(listen), config.network.queue_capacity);
      server->start();
      std::cout << "listening on " << parse_listen(listen).host << ":" << server->port() << " (tcp, websocket)"
                << std::endl;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto wall_start = std::chrono::steady_clock::now();
    while (!g_stop && (total_ticks == 0 || session.station().ticks() < total_ticks)) {
      if (server) server->pump_inbound();
      if (script) script->pump(session);
      session.tick();
      if (rate_scale > 0) {
        const auto virtual_us = std::chrono::microseconds(session.station().now_us());
        std::this_thread::sleep_until(
            wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(virtual_us / rate_scale));
      }
    }
    session.finish();
    if (server) server->stop();
    if (!export_prefix.empty()) simworld::export_map(session.station().map(), export_prefix);

    const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    std::cerr << "ran " << session.station().ticks() << " ticks (" << session.station().now_s() << " s virtual, "
              << wall_s << " s wall)";
    if (server)
      std::cerr << "; dropped " << server->dropped_outbound() << " outbound, " << server->dropped_inbound()
                << " inbound";
    std::cerr << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
  } catch (const simworld::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
  } catch (const SessionError& e) {
    std::cerr << "session error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
