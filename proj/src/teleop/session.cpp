#include "mavi/teleop/session.hpp"

#include <fstream>
#include <sstream>

namespace mavi::teleop {

SessionError::SessionError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string strip_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

Envelope envelope_from_json(const Json& j, std::size_t line) {
  if (!j.is_object() || !j.contains("topic") || !j["topic"].is_string() || !j.contains("stamp") ||
      !j["stamp"].is_number() || !j.contains("seq") || !j["seq"].is_number_unsigned() || !j.contains("payload"))
    throw SessionError(line, "malformed envelope");
  return {j["topic"].get<std::string>(), j["stamp"].get<double>(), j["seq"].get<std::uint64_t>(), j["payload"]};
}

}  // namespace

SessionLog parse_session(std::string_view text) {
  SessionLog log;
  bool have_header = false;
  bool have_end = false;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SessionError(lineno, "malformed JSON");
    }
    if (have_end) throw SessionError(lineno, "content after end record");
    if (!have_header) {
      const auto h = j.find("session");
      if (h == j.end() || !h->is_object()) throw SessionError(lineno, "missing session header");
      try {
        log.header.format = h->at("format").get<int>();
        log.header.config_hash = h->at("config_hash").get<std::string>();
        log.header.scenario_hash = h->at("scenario_hash").get<std::string>();
        log.header.seed = h->at("seed").get<std::uint64_t>();
      } catch (const Json::exception&) {
        throw SessionError(lineno, "incomplete session header");
      }
      if (log.header.format != kSessionFormat) throw SessionError(lineno, "unsupported session format");
      have_header = true;
      continue;
    }
    if (j.contains("end")) {
      if (!j["end"].is_object() || !j["end"].contains("ticks") || !j["end"]["ticks"].is_number_unsigned())
        throw SessionError(lineno, "malformed end record");
      log.ticks = j["end"]["ticks"].get<std::uint64_t>();
      have_end = true;
      continue;
    }
    const auto dir = j.find("dir");
    if (dir == j.end() || !j.contains("envelope")) throw SessionError(lineno, "expected dir and envelope");
    if (*dir == "in") {
      log.inbound.push_back(envelope_from_json(j["envelope"], lineno));
    } else if (*dir == "out") {
      envelope_from_json(j["envelope"], lineno);
      log.outbound.push_back(j["envelope"].dump());
    } else {
      throw SessionError(lineno, "dir must be 'in' or 'out'");
    }
  }
  if (!have_header) throw SessionError(lineno, "empty session log");
  if (!have_end) throw SessionError(lineno, "session log has no end record (truncated?)");
  return log;
}

SessionLog load_session(const std::string& path) { return parse_session(read_file(path)); }

Session::Session(StationConfig config, std::string scenario_text, std::optional<std::uint64_t> seed) {
  simworld::Scenario scenario = simworld::parse_scenario(scenario_text);
  if (seed) scenario.seed = *seed;
  header_.config_hash = config_hash(config);
  header_.scenario_hash = scenario_hash(scenario_text);
  header_.seed = scenario.seed;
  station_ = std::make_unique<Station>(std::move(config), scenario);
  station_->set_sink([this](const Envelope& e) { on_publish(e); });
}

void Session::record_to(std::ostream* out) {
  record_ = out;
  if (!record_) return;
  Json h = {{"session",
             {{"format", header_.format},
              {"config_hash", header_.config_hash},
              {"scenario_hash", header_.scenario_hash},
              {"seed", header_.seed}}}};
  *record_ << h.dump() << '\n';
}

std::size_t Session::add_listener(Listener listener) {
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

void Session::remove_listener(std::size_t handle) { listeners_.erase(handle); }

void Session::on_publish(const Envelope& e) {
  const std::string line = encode_envelope(e);
  if (record_) *record_ << "{\"dir\":\"out\",\"envelope\":" << strip_newline(line) << "}\n";
  for (const auto& [_, l] : listeners_) l(e, line);
}

Envelope Session::submit(Envelope e) {
  Envelope stamped = station_->submit(std::move(e));
  if (record_) *record_ << "{\"dir\":\"in\",\"envelope\":" << strip_newline(encode_envelope(stamped)) << "}\n";
  return stamped;
}

void Session::tick() { station_->tick(); }

void Session::finish() {
  if (finished_) return;
  finished_ = true;
  if (record_) {
    *record_ << Json({{"end", {{"ticks", station_->ticks()}}}}).dump() << '\n';
    record_->flush();
  }
}

std::string to_string(ReplayStatus s) {
  switch (s) {
    case ReplayStatus::Match: return "match";
    case ReplayStatus::ConfigMismatch: return "config-mismatch";
    case ReplayStatus::ScenarioMismatch: return "scenario-mismatch";
    case ReplayStatus::SeedMismatch: return "seed-mismatch";
    case ReplayStatus::Divergence: return "divergence";
  }
  return "?";
}

namespace {

struct Line {
  std::string text;
  std::size_t index;  // position in the whole stream, for tie-breaks
};

// Lines go through one parse/dump so both sides compare in the same normal form.
std::map<std::string, std::vector<Line>> by_topic(const std::vector<std::string>& lines) {
  std::map<std::string, std::vector<Line>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Json j = Json::parse(lines[i]);
    out[j["topic"].get<std::string>()].push_back({j.dump(), i});
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> topic_hashes(const std::vector<std::string>& lines) {
  std::map<std::string, std::string> out;
  for (const auto& [topic, ls] : by_topic(lines)) {
    std::uint64_t h = fnv1a("");
    for (const auto& l : ls) h = fnv1a(l.text, h);
    out[topic] = hex64(h);
  }
  return out;
}

ReplayReport replay_session(const SessionLog& log, const StationConfig& config, const std::string& scenario_text,
                            std::optional<std::uint64_t> seed, bool force) {
  ReplayReport r;
  if (config_hash(config) != log.header.config_hash) {
    r.status = ReplayStatus::ConfigMismatch;
    r.message = "config hash " + config_hash(config) + " differs from recorded " + log.header.config_hash;
    return r;
  }
  if (scenario_hash(scenario_text) != log.header.scenario_hash) {
    r.status = ReplayStatus::ScenarioMismatch;
    r.message = "scenario hash " + scenario_hash(scenario_text) + " differs from recorded " + log.header.scenario_hash;
    return r;
  }
  Session session(config, scenario_text, seed);
  if (session.header().seed != log.header.seed && !force) {
    r.status = ReplayStatus::SeedMismatch;
    r.message = "seed " + std::to_string(session.header().seed) + " differs from recorded " +
                std::to_string(log.header.seed) + " (use force to replay anyway)";
    return r;
  }

  std::vector<std::string> replayed;
  session.add_listener([&](const Envelope&, const std::string& line) { replayed.push_back(strip_newline(line)); });
  std::size_t next = 0;
  auto pump = [&] {
    while (next < log.inbound.size() &&
           std::llround(log.inbound[next].stamp_s * 1e6) <= session.station().now_us())
      session.submit(log.inbound[next++]);
  };
  for (std::uint64_t t = 0; t < log.ticks; ++t) {
    pump();
    session.tick();
  }
  pump();

  r.recorded_hashes = topic_hashes(log.outbound);
  r.replayed_hashes = topic_hashes(replayed);
  const auto rec = by_topic(log.outbound);
  const auto rep = by_topic(replayed);
  std::map<std::string, int> topics;
  for (const auto& [t, _] : rec) topics[t];
  for (const auto& [t, _] : rep) topics[t];
  std::size_t first_index = 0;
  for (const auto& [topic, _] : topics) {
    static const std::vector<Line> kNone;
    const auto& a = rec.count(topic) ? rec.at(topic) : kNone;
    const auto& b = rep.count(topic) ? rep.at(topic) : kNone;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      const std::string ra = i < a.size() ? a[i].text : std::string();
      const std::string rb = i < b.size() ? b[i].text : std::string();
      if (ra == rb) continue;
      const Json j = Json::parse(ra.empty() ? rb : ra);
      const std::size_t index = i < a.size() ? a[i].index : b[i].index;
      Divergence d{topic, j["seq"].get<std::uint64_t>(), j["stamp"].get<double>(), ra, rb};
      const bool earlier = !r.first_divergence || d.stamp_s < r.first_divergence->stamp_s ||
                           (d.stamp_s == r.first_divergence->stamp_s && index < first_index);
      if (earlier) {
        r.first_divergence = d;
        first_index = index;
      }
      break;
    }
  }
  if (r.first_divergence) {
    r.status = ReplayStatus::Divergence;
    const auto& d = *r.first_divergence;
    std::ostringstream m;
    m << "first divergence on " << d.topic << " seq " << d.seq << " at t=" << d.stamp_s << " s";
    r.message = m.str();
  } else {
    r.status = ReplayStatus::Match;
    r.message = std::to_string(log.outbound.size()) + " outbound envelopes identical";
  }
  return r;
}

std::vector<ScriptEntry> parse_script(std::string_view text) {
  std::vector<ScriptEntry> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw SessionError(lineno, "malformed JSON");
    }
    if (!j.is_object() || !j.contains("at") || !j["at"].is_number() || !j.contains("topic") ||
        !j["topic"].is_string() || !j.contains("payload") || !j["payload"].is_object())
      throw SessionError(lineno, "script entries need at, topic and payload");
    const double at = j["at"].get<double>();
    if (!(at >= 0.0) || !std::isfinite(at)) throw SessionError(lineno, "at must be >= 0");
    out.push_back({at, j["topic"].get<std::string>(), j["payload"]});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.at_s < b.at_s; });
  return out;
}

void ScriptPlayer::pump(Session& session) {
  while (next_ < entries_.size() && std::llround(entries_[next_].at_s * 1e6) <= session.station().now_us()) {
    const auto& e = entries_[next_++];
    session.submit({e.topic, 0.0, next_ - 1, e.payload});
  }
}

}  // namespace mavi::teleop
