#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mavi/common.hpp"

namespace mavi::devicebus {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kHeaderByte = 0xFF;
inline constexpr std::uint8_t kBroadcastId = 254;
inline constexpr std::size_t kMaxPayload = 250;
/// Header (2) + id + length + instruction + checksum.
inline constexpr std::size_t kFrameOverhead = 6;

inline constexpr std::uint32_t kBitsPerSecond = 1'000'000;
inline constexpr std::uint32_t kCycleHz = 100;
/// 8N1: start + 8 data + stop.
inline constexpr std::uint32_t kBitsPerByte = 10;
inline constexpr std::uint32_t kCycleBitBudget = kBitsPerSecond / kCycleHz;
/// Idle line time between a request and its response.
inline constexpr std::uint32_t kTurnaroundBits = 2 * kBitsPerByte;

enum class Instruction : std::uint8_t { Ping = 0x01, Read = 0x02, Write = 0x03, Status = 0x55 };

std::string to_string(Instruction i);

struct BusFrame {
  std::uint8_t device_id = 0;
  Instruction instruction = Instruction::Ping;
  Bytes payload;

  std::size_t wire_size() const { return kFrameOverhead + payload.size(); }
  friend bool operator==(const BusFrame&, const BusFrame&) = default;
};

std::uint8_t checksum(std::uint8_t id, std::uint8_t length, std::uint8_t instruction,
                      std::span<const std::uint8_t> payload);

/// Serializes FF FF id len instr payload... checksum. Throws InvalidArgument on
/// oversize payload or id > 254.
Bytes encode_frame(const BusFrame& frame);

enum class DecodeError { NoHeader, Truncated, BadChecksum, BadLength };

std::string to_string(DecodeError e);

struct DecodeResult {
  std::optional<BusFrame> frame;
  std::optional<DecodeError> error;
  /// Bytes discarded before the first header.
  std::size_t skipped = 0;
  /// Bytes consumed including skipped junk and the frame itself.
  std::size_t consumed = 0;

  bool ok() const { return frame.has_value(); }
};

/// Scans for the first FF FF header and decodes one frame after it.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

enum class ModuleKind { WheelActuator, ArmJoint, Gripper, PtruJoint, Imu, SonarArray, ForceSensor };

std::string to_string(ModuleKind k);
std::optional<ModuleKind> module_kind_from_string(const std::string& s);

struct ModuleDescriptor {
  std::uint8_t device_id = 0;
  ModuleKind kind = ModuleKind::WheelActuator;
  std::size_t read_payload_bytes = 0;
  std::size_t write_payload_bytes = 0;
  /// Must divide the 100 Hz cycle rate.
  std::uint32_t poll_rate_hz = kCycleHz;

  std::uint32_t rate_divider() const { return kCycleHz / poll_rate_hz; }
  /// READ request + STATUS response.
  std::size_t read_transaction_bytes() const {
    return kFrameOverhead + kFrameOverhead + read_payload_bytes;
  }
  /// WRITE command + empty STATUS acknowledgement.
  std::size_t write_transaction_bytes() const {
    return kFrameOverhead + write_payload_bytes + kFrameOverhead;
  }

  void validate() const;
};

class DuplicateId : public std::runtime_error {
 public:
  explicit DuplicateId(std::uint8_t id);
};

class Registry {
 public:
  void register_module(const ModuleDescriptor& d);
  const ModuleDescriptor* find(std::uint8_t id) const;
  std::size_t size() const { return modules_.size(); }
  bool empty() const { return modules_.empty(); }
  std::size_t count(ModuleKind kind) const;
  /// Ascending id order.
  std::vector<ModuleDescriptor> modules() const;

 private:
  std::map<std::uint8_t, ModuleDescriptor> modules_;
};

/// Device ids used by the default robot registry.
namespace ids {
inline constexpr std::uint8_t kWheelBase = 1;       // 1..4
inline constexpr std::uint8_t kArmBase = 11;        // 11 lift, 12..16 revolute
inline constexpr std::uint8_t kArmGripper = 21;
inline constexpr std::uint8_t kBaseGripper = 22;
inline constexpr std::uint8_t kPtruBase = 31;       // 31 pan, 32 tilt, 33 roll
inline constexpr std::uint8_t kImuBody = 41;
inline constexpr std::uint8_t kImuHead = 42;
inline constexpr std::uint8_t kSonar = 51;
}  // namespace ids

/// 4 wheels, 6 arm joints, 2 grippers, 3 PTRU joints, 2 IMUs, 1 sonar array.
Registry default_registry();

/// Steady-state fraction of line capacity used when every module is polled at
/// its rate and every actuator is also commanded once per poll.
double bus_utilization(const Registry& registry);

/// A bus endpoint. Returns the response frame bytes, or nothing for silence.
class Device {
 public:
  virtual ~Device() = default;
  virtual std::optional<Bytes> handle(std::span<const std::uint8_t> request) = 0;
};

/// Register-style device: READ returns the current status bytes, WRITE stores the
/// command bytes, PING answers with an empty status.
class EmulatedDevice : public Device {
 public:
  EmulatedDevice(std::uint8_t id, std::size_t status_bytes);

  std::optional<Bytes> handle(std::span<const std::uint8_t> request) override;

  void set_status(Bytes status);
  const Bytes& status() const { return status_; }
  const std::optional<Bytes>& last_command() const { return last_command_; }
  /// Takes and clears the most recent command.
  std::optional<Bytes> take_command();
  void set_responsive(bool on) { responsive_ = on; }
  std::uint64_t writes_received() const { return writes_; }

 private:
  std::uint8_t id_;
  Bytes status_;
  std::optional<Bytes> last_command_;
  bool responsive_ = true;
  std::uint64_t writes_ = 0;
};

enum class TransactionResult { Ok, Timeout, Corrupt };

struct Transaction {
  std::uint8_t device_id = 0;
  Instruction instruction = Instruction::Read;
  TransactionResult result = TransactionResult::Ok;
  /// Line occupancy in bit-times relative to the cycle start.
  std::uint64_t start_bit = 0;
  std::uint64_t end_bit = 0;
  std::size_t bytes = 0;
};

struct CycleReport {
  std::uint64_t cycle_index = 0;
  std::size_t bytes_on_wire = 0;
  std::uint32_t bit_time_budget = kCycleBitBudget;
  /// Idle turnaround time between requests and responses.
  std::uint64_t turnaround_bits = 0;
  std::vector<Transaction> transactions;
  bool overrun = false;

  /// bytes_on_wire * 10 > budget.
  static bool overrun_law(std::size_t bytes) {
    return bytes * kBitsPerByte > static_cast<std::size_t>(kCycleBitBudget);
  }
};

/// Device Communication Manager: owns the serialized bus and polls the registry
/// once per 10 ms virtual cycle.
class DeviceCommunicationManager {
 public:
  explicit DeviceCommunicationManager(Registry registry);

  void attach(std::uint8_t id, std::shared_ptr<Device> device);
  const Registry& registry() const { return registry_; }

  /// Queues a WRITE payload for the next cycle; replaces any pending write to the
  /// same id. Throws InvalidArgument for unknown ids or oversize payloads.
  void queue_write(std::uint8_t id, Bytes payload);
  std::size_t pending_writes() const { return pending_.size(); }

  /// Runs one cycle: READs every due module then flushes pending WRITEs, both in
  /// ascending id order.
  CycleReport run_cycle();

  std::uint64_t cycle_index() const { return cycle_; }
  /// Most recent successfully read status payload of a device.
  const Bytes* latest_status(std::uint8_t id) const;

 private:
  void transact(CycleReport& report, std::uint64_t& bit, const BusFrame& request);

  Registry registry_;
  std::map<std::uint8_t, std::shared_ptr<Device>> devices_;
  std::map<std::uint8_t, Bytes> pending_;
  std::map<std::uint8_t, Bytes> snapshots_;
  std::uint64_t cycle_ = 0;
};

/// Little-endian payload helpers for device registers.
void put_f64(Bytes& out, double v);
double get_f64(std::span<const std::uint8_t> in, std::size_t offset);
void put_f32(Bytes& out, float v);
float get_f32(std::span<const std::uint8_t> in, std::size_t offset);
void put_u16(Bytes& out, std::uint16_t v);
std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t offset);

}  // namespace mavi::devicebus
