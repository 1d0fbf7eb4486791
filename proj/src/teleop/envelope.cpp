#include "mavi/teleop/envelope.hpp"

#include <cmath>

namespace mavi::teleop {

namespace {

using F = FieldType;

FieldSpec num(std::string n) { return {std::move(n), F::Number}; }
FieldSpec nums(std::string n, std::size_t size) { return {std::move(n), F::NumberArray, size}; }
FieldSpec optional(FieldSpec f) {
  f.required = false;
  return f;
}

std::vector<TopicSpec> build_table() {
  const auto tel = Direction::Telemetry;
  const auto cmd = Direction::Command;
  const std::vector<FieldSpec> imu{nums("orientation", 4), nums("angular_velocity", 3),
                                   nums("linear_acceleration", 3)};
  const std::vector<FieldSpec> ee{num("x"), num("y"), num("z"), num("pitch"), num("heading"), num("roll")};
  return {
      {"pose2d", tel, {num("x"), num("y"), num("heading"), num("vx"), num("vy"), num("w"), num("odom_x"), num("odom_y"), num("odom_heading")}},
      {"wheel_states", tel, {nums("command", 4), nums("measured", 4)}},
      {"joint_states", tel, {num("lift"), nums("theta", 5), num("gripper"), num("base_gripper"), {"moving", F::Boolean}}},
      {"ptru_state", tel, {num("pan"), num("tilt"), num("roll"), nums("command", 3), num("baseline_mm")}},
      {"imu_body", tel, imu},
      {"imu_head", tel, imu},
      {"scan", tel,
       {num("angle_min"), num("angle_max"), num("angle_increment"), num("range_min"), num("range_max"),
        {"ranges", F::NullableNumberArray}}},
      {"sonar", tel, {{"ranges", F::NullableNumberArray, 12}}},
      {"map_delta", tel,
       {num("resolution"), nums("origin", 2), {"width", F::Integer}, {"height", F::Integer}, {"cells", F::Array}}},
      {"bus_cycle", tel,
       {{"cycle", F::Integer}, {"bytes", F::Integer}, {"budget_bits", F::Integer}, {"turnaround_bits", F::Integer},
        {"transactions", F::Integer}, {"timeouts", F::Integer}, {"overrun", F::Boolean}, num("utilization")}},
      {"camera_pose", tel, {nums("orientation", 4), nums("position", 3), num("baseline_mm")}},
      {"path", tel, {{"waypoints", F::Array}, num("cost"), nums("goal", 2)}},
      {"ik_preview", tel, {{"reachable", F::Boolean}, optional({"joints", F::Object}), optional({"error", F::String})}},
      {"error", tel, {{"code", F::String}, {"message", F::String}, optional({"topic", F::String}), optional({"seq", F::Integer})}},
      {"cmd_vel", cmd, {num("vx"), num("vy"), num("w")}},
      {"cmd_ee_pose", cmd, ee},
      {"cmd_ee_preview", cmd, ee},
      {"cmd_joint_traj", cmd, {{"knots", F::Array}}},
      {"cmd_head", cmd, {nums("orientation", 4)}},
      {"cmd_gripper", cmd, {num("width"), optional({"target", F::String}), optional(num("payload_kg"))}},
      {"cmd_baseline", cmd, {num("mm")}},
      {"cmd_goal", cmd, {num("x"), num("y")}},
  };
}

std::string type_name(FieldType t) {
  switch (t) {
    case F::Number: return "number";
    case F::Integer: return "integer";
    case F::Boolean: return "boolean";
    case F::String: return "string";
    case F::NumberArray: return "number[]";
    case F::NullableNumberArray: return "number?[]";
    case F::Object: return "object";
    case F::Array: return "array";
  }
  return "?";
}

bool matches(const FieldSpec& f, const Json& v) {
  switch (f.type) {
    case F::Number: return v.is_number();
    case F::Integer: return v.is_number_integer();
    case F::Boolean: return v.is_boolean();
    case F::String: return v.is_string();
    case F::Object: return v.is_object();
    case F::Array: return v.is_array() && (f.size == 0 || v.size() == f.size);
    case F::NumberArray:
    case F::NullableNumberArray:
      if (!v.is_array() || (f.size != 0 && v.size() != f.size)) return false;
      for (const auto& e : v)
        if (!(e.is_number() || (f.type == F::NullableNumberArray && e.is_null()))) return false;
      return true;
  }
  return false;
}

}  // namespace

const std::vector<TopicSpec>& topic_table() {
  static const std::vector<TopicSpec> table = build_table();
  return table;
}

const TopicSpec* find_topic(std::string_view name) {
  for (const auto& t : topic_table())
    if (t.name == name) return &t;
  return nullptr;
}

Json schema_json() {
  Json topics = Json::object();
  for (const auto& t : topic_table()) {
    Json fields = Json::array();
    for (const auto& f : t.fields) {
      Json jf = {{"name", f.name}, {"type", type_name(f.type)}};
      if (f.size) jf["size"] = f.size;
      if (!f.required) jf["required"] = false;
      fields.push_back(jf);
    }
    topics[t.name] = {{"direction", t.direction == Direction::Telemetry ? "telemetry" : "command"},
                      {"fields", fields}};
  }
  return {{"format", "ndjson"},
          {"envelope", {"topic", "stamp", "seq", "payload"}},
          {"fraction_digits", kWireDigits},
          {"topics", topics}};
}

std::optional<std::string> validate_payload(const TopicSpec& entry, const Json& payload) {
  if (!payload.is_object()) return "payload must be an object";
  for (const auto& f : entry.fields) {
    const auto it = payload.find(f.name);
    if (it == payload.end()) {
      if (f.required) return "payload." + f.name + " is missing";
      continue;
    }
    if (!matches(f, *it)) {
      std::string want = type_name(f.type);
      if (f.size) want += " of length " + std::to_string(f.size);
      return "payload." + f.name + " must be " + want;
    }
  }
  for (auto it = payload.begin(); it != payload.end(); ++it) {
    bool known = false;
    for (const auto& f : entry.fields) known = known || f.name == it.key();
    if (!known) return "payload." + it.key() + " is not a field of " + entry.name;
  }
  return std::nullopt;
}

double round_wire(double v) {
  // Beyond 2^53 / 1e9 the scaled value no longer has a fractional part to drop.
  if (std::abs(v) >= 9.0e6) return v;
  const double r = std::round(v * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;
}

void canonicalize_numbers(Json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    j = std::isfinite(v) ? Json(round_wire(v)) : Json(nullptr);
  } else if (j.is_structured()) {
    for (auto& e : j) canonicalize_numbers(e);
  }
}

std::string encode_envelope(const Envelope& e) {
  Json payload = e.payload;
  canonicalize_numbers(payload);
  Json j;
  j["topic"] = e.topic;
  j["stamp"] = round_wire(e.stamp_s);
  j["seq"] = e.seq;
  j["payload"] = std::move(payload);
  std::string out = j.dump(-1, ' ', false, Json::error_handler_t::replace);
  out.push_back('\n');
  return out;
}

Envelope canonical(Envelope e) {
  canonicalize_numbers(e.payload);
  // Re-parse so value types match what a decoder would produce.
  e.payload = Json::parse(e.payload.dump());
  e.stamp_s = round_wire(e.stamp_s);
  return e;
}

EnvelopeDecodeError::EnvelopeDecodeError(std::size_t offset, const std::string& message)
    : std::runtime_error("decode error at byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

std::optional<Envelope> EnvelopeDecoder::decode_line(std::string_view line, std::size_t base) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  auto fail = [&](std::size_t at, const std::string& msg) -> EnvelopeDecodeError {
    ++errors_;
    return EnvelopeDecodeError(base + at, msg);
  };
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw fail(e.byte > 0 ? e.byte - 1 : 0, "malformed JSON");
  }
  if (!j.is_object()) throw fail(0, "envelope must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "topic" && k != "stamp" && k != "seq" && k != "payload") throw fail(0, "unexpected field '" + k + "'");
  }
  const auto topic = j.find("topic");
  if (topic == j.end() || !topic->is_string()) throw fail(0, "missing string field 'topic'");
  const auto stamp = j.find("stamp");
  if (stamp == j.end() || !stamp->is_number() || !std::isfinite(stamp->get<double>()))
    throw fail(0, "missing numeric field 'stamp'");
  const auto seq = j.find("seq");
  if (seq == j.end() || !seq->is_number_unsigned()) throw fail(0, "missing unsigned field 'seq'");
  const auto payload = j.find("payload");
  if (payload == j.end() || !payload->is_object()) throw fail(0, "missing object field 'payload'");

  const TopicSpec* entry = find_topic(topic->get<std::string>());
  if (!entry) {
    ++unknown_;
    return std::nullopt;
  }
  if (auto err = validate_payload(*entry, *payload)) throw fail(0, *err);
  ++decoded_;
  return Envelope{topic->get<std::string>(), stamp->get<double>(), seq->get<std::uint64_t>(), std::move(*payload)};
}

void EnvelopeDecoder::feed(std::string_view chunk, const std::function<void(Envelope)>& on_envelope,
                           const std::function<void(const EnvelopeDecodeError&)>& on_error) {
  partial_.append(chunk);
  std::size_t start = 0;
  for (;;) {
    const std::size_t nl = partial_.find('\n', start);
    if (nl == std::string::npos) break;
    std::string_view line(partial_.data() + start, nl - start);
    const std::size_t line_offset = stream_offset_ + start;
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      if (auto e = decode_line(line, line_offset)) on_envelope(std::move(*e));
    } catch (const EnvelopeDecodeError& err) {
      on_error(err);
    }
  }
  partial_.erase(0, start);
  stream_offset_ += start;
}

Envelope decode_envelope(std::string_view line) {
  EnvelopeDecoder d;
  auto e = d.decode_line(line);
  if (!e) throw EnvelopeDecodeError(0, "unknown topic");
  return std::move(*e);
}

}  // namespace mavi::teleop
