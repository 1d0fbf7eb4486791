#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mavi::teleop {

using Json = nlohmann::ordered_json;

struct Envelope {
  std::string topic;
  double stamp_s = 0.0;
  std::uint64_t seq = 0;
  Json payload = Json::object();

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

enum class Direction { Telemetry, Command };

enum class FieldType { Number, Integer, Boolean, String, NumberArray, NullableNumberArray, Object, Array };

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::Number;
  /// Fixed element count for arrays; 0 accepts any length.
  std::size_t size = 0;
  bool required = true;
};

struct TopicSpec {
  std::string name;
  Direction direction = Direction::Telemetry;
  std::vector<FieldSpec> fields;
};

const std::vector<TopicSpec>& topic_table();
const TopicSpec* find_topic(std::string_view name);

/// Machine-readable form of the topic table, shared with clients.
Json schema_json();

/// Returns a message for the first field violating the topic schema.
std::optional<std::string> validate_payload(const TopicSpec& entry, const Json& payload);

/// Fraction digits kept on the wire.
inline constexpr int kWireDigits = 9;

double round_wire(double v);
/// Rounds every float to the wire precision and replaces non-finite values with null.
void canonicalize_numbers(Json& j);

/// One line of newline-delimited JSON, keys in the order topic, stamp, seq, payload.
std::string encode_envelope(const Envelope& e);

/// What decode(encode(e)) yields.
Envelope canonical(Envelope e);

class EnvelopeDecodeError : public std::runtime_error {
 public:
  EnvelopeDecodeError(std::size_t offset, const std::string& message);
  /// Byte offset of the problem in the decoder's input stream.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EnvelopeDecoder {
 public:
  /// Decodes one line (trailing newline optional). Unknown topics return nothing
  /// and bump the counter. Throws EnvelopeDecodeError on malformed input; the
  /// offset is relative to base_offset.
  std::optional<Envelope> decode_line(std::string_view line, std::size_t base_offset = 0);

  /// Stream interface: splits on newlines, buffers partial lines across calls and
  /// reports offsets from the start of the stream.
  void feed(std::string_view chunk, const std::function<void(Envelope)>& on_envelope,
            const std::function<void(const EnvelopeDecodeError&)>& on_error);

  std::uint64_t unknown_topics() const { return unknown_; }
  std::uint64_t errors() const { return errors_; }
  std::uint64_t decoded() const { return decoded_; }

 private:
  std::string partial_;
  std::size_t stream_offset_ = 0;
  std::uint64_t unknown_ = 0;
  std::uint64_t errors_ = 0;
  std::uint64_t decoded_ = 0;
};

/// Convenience wrapper for a single well-formed line; throws on unknown topics too.
Envelope decode_envelope(std::string_view line);

}  // namespace mavi::teleop
