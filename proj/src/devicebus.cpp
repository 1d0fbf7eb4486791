#include "mavi/devicebus.hpp"

#include <bit>
#include <cstring>

namespace mavi::devicebus {

std::string to_string(Instruction i) {
  switch (i) {
    case Instruction::Ping: return "PING";
    case Instruction::Read: return "READ";
    case Instruction::Write: return "WRITE";
    case Instruction::Status: return "STATUS";
  }
  return "UNKNOWN";
}

std::string to_string(DecodeError e) {
  switch (e) {
    case DecodeError::NoHeader: return "no-header";
    case DecodeError::Truncated: return "truncated-frame";
    case DecodeError::BadChecksum: return "bad-checksum";
    case DecodeError::BadLength: return "bad-length";
  }
  return "unknown";
}

std::uint8_t checksum(std::uint8_t id, std::uint8_t length, std::uint8_t instruction,
                      std::span<const std::uint8_t> payload) {
  unsigned sum = id + length + instruction;
  for (auto b : payload) sum += b;
  return static_cast<std::uint8_t>(~sum & 0xFFu);
}

Bytes encode_frame(const BusFrame& frame) {
  if (frame.payload.size() > kMaxPayload)
    throw InvalidArgument("bus payload exceeds " + std::to_string(kMaxPayload) + " bytes");
  if (frame.device_id > kBroadcastId)
    throw InvalidArgument("bus device id " + std::to_string(frame.device_id) + " out of range");
  const auto length = static_cast<std::uint8_t>(frame.payload.size() + 2);
  const auto instr = static_cast<std::uint8_t>(frame.instruction);
  Bytes out;
  out.reserve(frame.wire_size());
  out.push_back(kHeaderByte);
  out.push_back(kHeaderByte);
  out.push_back(frame.device_id);
  out.push_back(length);
  out.push_back(instr);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  out.push_back(checksum(frame.device_id, length, instr, frame.payload));
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  // A header is FF FF followed by a non-FF id byte.
  std::size_t start = 0;
  bool found = false;
  for (; start + 1 < bytes.size(); ++start) {
    if (bytes[start] == kHeaderByte && bytes[start + 1] == kHeaderByte &&
        (start + 2 >= bytes.size() || bytes[start + 2] != kHeaderByte)) {
      found = true;
      break;
    }
  }
  if (!found) {
    r.error = DecodeError::NoHeader;
    r.skipped = bytes.size();
    r.consumed = bytes.size();
    return r;
  }
  r.skipped = start;
  const std::size_t avail = bytes.size() - start;
  if (avail < 4) {
    r.error = DecodeError::Truncated;
    r.consumed = start;
    return r;
  }
  const std::uint8_t id = bytes[start + 2];
  const std::uint8_t length = bytes[start + 3];
  if (length < 2) {
    r.error = DecodeError::BadLength;
    r.consumed = start + 4;
    return r;
  }
  const std::size_t total = 4 + std::size_t{length};
  if (avail < total) {
    r.error = DecodeError::Truncated;
    r.consumed = start;
    return r;
  }
  const std::uint8_t instr = bytes[start + 4];
  const auto payload = bytes.subspan(start + 5, length - 2);
  const std::uint8_t expected = checksum(id, length, instr, payload);
  r.consumed = start + total;
  if (bytes[start + total - 1] != expected) {
    r.error = DecodeError::BadChecksum;
    return r;
  }
  r.frame = BusFrame{id, static_cast<Instruction>(instr), Bytes(payload.begin(), payload.end())};
  return r;
}

std::string to_string(ModuleKind k) {
  switch (k) {
    case ModuleKind::WheelActuator: return "wheel-actuator";
    case ModuleKind::ArmJoint: return "arm-joint";
    case ModuleKind::Gripper: return "gripper";
    case ModuleKind::PtruJoint: return "ptru-joint";
    case ModuleKind::Imu: return "imu";
    case ModuleKind::SonarArray: return "sonar-array";
    case ModuleKind::ForceSensor: return "force-sensor";
  }
  return "unknown";
}

std::optional<ModuleKind> module_kind_from_string(const std::string& s) {
  for (auto k : {ModuleKind::WheelActuator, ModuleKind::ArmJoint, ModuleKind::Gripper,
                 ModuleKind::PtruJoint, ModuleKind::Imu, ModuleKind::SonarArray,
                 ModuleKind::ForceSensor}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void ModuleDescriptor::validate() const {
  const std::string who = "module " + std::to_string(device_id);
  if (device_id >= kBroadcastId) throw InvalidArgument(who + ": id must be < 254");
  if (read_payload_bytes > kMaxPayload || write_payload_bytes > kMaxPayload)
    throw InvalidArgument(who + ": payload sizes must be <= 250");
  if (poll_rate_hz == 0 || poll_rate_hz > kCycleHz || kCycleHz % poll_rate_hz != 0)
    throw InvalidArgument(who + ": poll_rate_hz must divide 100");
}

DuplicateId::DuplicateId(std::uint8_t id)
    : std::runtime_error("duplicate device id " + std::to_string(id)) {}

void Registry::register_module(const ModuleDescriptor& d) {
  d.validate();
  if (modules_.contains(d.device_id)) throw DuplicateId(d.device_id);
  modules_.emplace(d.device_id, d);
}

const ModuleDescriptor* Registry::find(std::uint8_t id) const {
  auto it = modules_.find(id);
  return it == modules_.end() ? nullptr : &it->second;
}

std::size_t Registry::count(ModuleKind kind) const {
  std::size_t n = 0;
  for (const auto& [id, d] : modules_) n += d.kind == kind ? 1 : 0;
  return n;
}

std::vector<ModuleDescriptor> Registry::modules() const {
  std::vector<ModuleDescriptor> out;
  out.reserve(modules_.size());
  for (const auto& [id, d] : modules_) out.push_back(d);
  return out;
}

Registry default_registry() {
  Registry reg;
  auto add = [&](std::uint8_t id, ModuleKind kind, std::size_t rd, std::size_t wr,
                 std::uint32_t hz) { reg.register_module({id, kind, rd, wr, hz}); };
  // Actuators report and accept one little-endian double.
  for (std::uint8_t i = 0; i < 4; ++i) add(ids::kWheelBase + i, ModuleKind::WheelActuator, 8, 8, 100);
  for (std::uint8_t i = 0; i < 6; ++i) add(ids::kArmBase + i, ModuleKind::ArmJoint, 8, 8, 100);
  add(ids::kArmGripper, ModuleKind::Gripper, 8, 8, 100);
  add(ids::kBaseGripper, ModuleKind::Gripper, 8, 8, 100);
  for (std::uint8_t i = 0; i < 3; ++i) add(ids::kPtruBase + i, ModuleKind::PtruJoint, 8, 8, 100);
  // IMU: quaternion + gyro + accel as ten floats.
  add(ids::kImuBody, ModuleKind::Imu, 40, 0, 100);
  add(ids::kImuHead, ModuleKind::Imu, 40, 0, 100);
  // Twelve ranges in millimetres.
  add(ids::kSonar, ModuleKind::SonarArray, 24, 0, 20);
  return reg;
}

double bus_utilization(const Registry& registry) {
  double bits_per_second = 0.0;
  for (const auto& d : registry.modules()) {
    std::size_t bytes = d.read_transaction_bytes();
    if (d.write_payload_bytes > 0) bytes += d.write_transaction_bytes();
    bits_per_second += static_cast<double>(bytes) * d.poll_rate_hz * kBitsPerByte;
  }
  return bits_per_second / kBitsPerSecond;
}

EmulatedDevice::EmulatedDevice(std::uint8_t id, std::size_t status_bytes)
    : id_(id), status_(status_bytes, 0) {}

std::optional<Bytes> EmulatedDevice::handle(std::span<const std::uint8_t> request) {
  if (!responsive_) return std::nullopt;
  const DecodeResult r = decode_frame(request);
  if (!r.ok() || r.frame->device_id != id_) return std::nullopt;
  switch (r.frame->instruction) {
    case Instruction::Ping:
      return encode_frame({id_, Instruction::Status, {}});
    case Instruction::Read:
      return encode_frame({id_, Instruction::Status, status_});
    case Instruction::Write:
      last_command_ = r.frame->payload;
      ++writes_;
      return encode_frame({id_, Instruction::Status, {}});
    case Instruction::Status:
      break;
  }
  return std::nullopt;
}

void EmulatedDevice::set_status(Bytes status) { status_ = std::move(status); }

std::optional<Bytes> EmulatedDevice::take_command() {
  auto out = std::move(last_command_);
  last_command_.reset();
  return out;
}

DeviceCommunicationManager::DeviceCommunicationManager(Registry registry)
    : registry_(std::move(registry)) {}

void DeviceCommunicationManager::attach(std::uint8_t id, std::shared_ptr<Device> device) {
  if (!registry_.find(id)) throw InvalidArgument("attach: unknown device id " + std::to_string(id));
  devices_[id] = std::move(device);
}

void DeviceCommunicationManager::queue_write(std::uint8_t id, Bytes payload) {
  const ModuleDescriptor* d = registry_.find(id);
  if (!d) throw InvalidArgument("queue_write: unknown device id " + std::to_string(id));
  if (payload.size() > kMaxPayload) throw InvalidArgument("queue_write: payload too large");
  pending_[id] = std::move(payload);
}

const Bytes* DeviceCommunicationManager::latest_status(std::uint8_t id) const {
  auto it = snapshots_.find(id);
  return it == snapshots_.end() ? nullptr : &it->second;
}

void DeviceCommunicationManager::transact(CycleReport& report, std::uint64_t& bit,
                                          const BusFrame& request) {
  const Bytes wire = encode_frame(request);
  Transaction t;
  t.device_id = request.device_id;
  t.instruction = request.instruction;
  t.start_bit = bit;
  bit += wire.size() * kBitsPerByte;
  t.bytes = wire.size();

  std::optional<Bytes> response;
  if (auto it = devices_.find(request.device_id); it != devices_.end())
    response = it->second->handle(wire);

  bit += kTurnaroundBits;
  report.turnaround_bits += kTurnaroundBits;
  if (!response) {
    // Silent device: the line is held for the expected response length.
    std::size_t expected = kFrameOverhead;
    if (request.instruction == Instruction::Read)
      expected += registry_.find(request.device_id)->read_payload_bytes;
    bit += expected * kBitsPerByte;
    t.result = TransactionResult::Timeout;
  } else {
    bit += response->size() * kBitsPerByte;
    t.bytes += response->size();
    const DecodeResult r = decode_frame(*response);
    if (!r.ok() || r.frame->device_id != request.device_id ||
        r.frame->instruction != Instruction::Status) {
      t.result = TransactionResult::Corrupt;
    } else {
      t.result = TransactionResult::Ok;
      if (request.instruction == Instruction::Read) snapshots_[request.device_id] = r.frame->payload;
    }
  }
  t.end_bit = bit;
  report.bytes_on_wire += t.bytes;
  report.transactions.push_back(t);
}

CycleReport DeviceCommunicationManager::run_cycle() {
  CycleReport report;
  report.cycle_index = cycle_;
  std::uint64_t bit = 0;
  for (const auto& d : registry_.modules()) {
    if (cycle_ % d.rate_divider() != 0) continue;
    transact(report, bit, {d.device_id, Instruction::Read, {}});
  }
  auto pending = std::move(pending_);
  pending_.clear();
  for (auto& [id, payload] : pending) transact(report, bit, {id, Instruction::Write, std::move(payload)});
  report.overrun = CycleReport::overrun_law(report.bytes_on_wire);
  ++cycle_;
  return report;
}

void put_f64(Bytes& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64(std::span<const std::uint8_t> in, std::size_t offset) {
  if (offset + 8 > in.size()) throw InvalidArgument("get_f64: payload too short");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{in[offset + i]} << (8 * i);
  return std::bit_cast<double>(bits);
}

void put_f32(Bytes& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(std::span<const std::uint8_t> in, std::size_t offset) {
  if (offset + 4 > in.size()) throw InvalidArgument("get_f32: payload too short");
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t{in[offset + i]} << (8 * i);
  return std::bit_cast<float>(bits);
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t offset) {
  if (offset + 2 > in.size()) throw InvalidArgument("get_u16: payload too short");
  return static_cast<std::uint16_t>(in[offset] | (in[offset + 1] << 8));
}

}  // namespace mavi::devicebus
