#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mavi/teleop/station.hpp"

namespace mavi::teleop {

class SessionError : public std::runtime_error {
 public:
  SessionError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kSessionFormat = 1;

struct SessionHeader {
  int format = kSessionFormat;
  std::string config_hash;
  std::string scenario_hash;
  std::uint64_t seed = 0;
};

/// A recorded run: header, every stamped inbound envelope, every outbound line.
struct SessionLog {
  SessionHeader header;
  std::vector<Envelope> inbound;
  std::vector<std::string> outbound;
  std::uint64_t ticks = 0;
};

/// Parses an NDJSON session log. Throws SessionError with the 1-based line.
SessionLog parse_session(std::string_view text);
SessionLog load_session(const std::string& path);

std::string read_file(const std::string& path);

/// A station plus its scenario identity, optional recorder and listeners.
class Session {
 public:
  /// seed overrides the scenario's noise seed when set.
  Session(StationConfig config, std::string scenario_text, std::optional<std::uint64_t> seed = std::nullopt);

  Station& station() { return *station_; }
  const Station& station() const { return *station_; }
  const SessionHeader& header() const { return header_; }

  /// Starts writing the log to out (header immediately, footer on finish()).
  void record_to(std::ostream* out);
  using Listener = std::function<void(const Envelope&, const std::string&)>;
  /// Called with every outbound envelope and its encoded line. Returns a handle
  /// for remove_listener.
  std::size_t add_listener(Listener listener);
  void remove_listener(std::size_t handle);

  Envelope submit(Envelope e);
  void tick();
  void finish();

 private:
  void on_publish(const Envelope& e);

  SessionHeader header_;
  std::unique_ptr<Station> station_;
  std::ostream* record_ = nullptr;
  bool finished_ = false;
  std::map<std::size_t, Listener> listeners_;
  std::size_t next_listener_ = 0;
};

enum class ReplayStatus { Match, ConfigMismatch, ScenarioMismatch, SeedMismatch, Divergence };
std::string to_string(ReplayStatus s);

struct Divergence {
  std::string topic;
  std::uint64_t seq = 0;
  double stamp_s = 0.0;
  /// Empty when that side has no line at this position.
  std::string recorded;
  std::string replayed;
};

struct ReplayReport {
  ReplayStatus status = ReplayStatus::Match;
  std::string message;
  std::map<std::string, std::string> recorded_hashes;
  std::map<std::string, std::string> replayed_hashes;
  std::optional<Divergence> first_divergence;
};

/// Re-runs a log against config and scenario. Identity checks come first
/// (config, scenario, seed); force skips the seed check only.
ReplayReport replay_session(const SessionLog& log, const StationConfig& config, const std::string& scenario_text,
                            std::optional<std::uint64_t> seed = std::nullopt, bool force = false);

/// Per-topic FNV-1a over the concatenated lines.
std::map<std::string, std::string> topic_hashes(const std::vector<std::string>& lines);

struct ScriptEntry {
  double at_s = 0.0;
  std::string topic;
  Json payload;
};

/// NDJSON of {"at": seconds, "topic": ..., "payload": {...}}; '#' starts a
/// comment line. Entries are returned in time order. Throws SessionError.
std::vector<ScriptEntry> parse_script(std::string_view text);

class ScriptPlayer {
 public:
  explicit ScriptPlayer(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}
  /// Submits every entry whose time has come.
  void pump(Session& session);
  bool done() const { return next_ == entries_.size(); }
  double last_time_s() const { return entries_.empty() ? 0.0 : entries_.back().at_s; }

 private:
  std::vector<ScriptEntry> entries_;
  std::size_t next_ = 0;
};

}  // namespace mavi::teleop
