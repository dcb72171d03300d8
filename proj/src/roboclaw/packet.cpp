#include "jenny5/roboclaw/packet.hpp"

#include <algorithm>
#include <array>

namespace jenny5::roboclaw {

namespace {

constexpr std::array<OpcodeInfo, 16> kTable{{
    {Opcode::DriveForwardM1, "drive_forward_M1", 1, 0},
    {Opcode::DriveBackwardM1, "drive_backward_M1", 1, 0},
    {Opcode::DriveForwardM2, "drive_forward_M2", 1, 0},
    {Opcode::DriveBackwardM2, "drive_backward_M2", 1, 0},
    {Opcode::ReadFirmwareVersion, "read_firmware_version", 0, kFirmwareFieldSize},
    {Opcode::ReadMainBattery, "read_main_battery", 0, 2},
    {Opcode::ReadMotorPwm, "read_motor_pwm", 0, 4},
    {Opcode::ReadMotorCurrents, "read_motor_currents", 0, 4},
    {Opcode::DriveM1DutyAccel, "drive_M1_duty_accel", 6, 0},
    {Opcode::DriveM2DutyAccel, "drive_M2_duty_accel", 6, 0},
    {Opcode::ReadTemperature, "read_temperature", 0, 2},
    {Opcode::SetM1MaxCurrent, "set_M1_max_current", 4, 0},
    {Opcode::SetM2MaxCurrent, "set_M2_max_current", 4, 0},
    {Opcode::ReadM1MaxCurrent, "read_M1_max_current", 0, 4},
    {Opcode::ReadM2MaxCurrent, "read_M2_max_current", 0, 4},
    {Opcode::ReadActuatorPositions, "read_actuator_positions", 0, 4},
}};

}  // namespace

std::optional<OpcodeInfo> opcode_info(std::uint8_t opcode) {
  auto it = std::find_if(kTable.begin(), kTable.end(),
                         [&](const OpcodeInfo& i) { return static_cast<std::uint8_t>(i.opcode) == opcode; });
  if (it == kTable.end()) return std::nullopt;
  return *it;
}

std::span<const OpcodeInfo> opcode_table() { return kTable; }

std::uint16_t crc16(std::span<const std::uint8_t> bytes, std::uint16_t crc) {
  for (std::uint8_t b : bytes) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

std::uint16_t crc16(std::string_view bytes, std::uint16_t crc) {
  return crc16(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), crc);
}

std::string encode_packet(const Packet& packet) {
  std::string out;
  out.reserve(packet.payload.size() + 4);
  out.push_back(static_cast<char>(packet.address));
  out.push_back(static_cast<char>(packet.opcode));
  for (auto b : packet.payload) out.push_back(static_cast<char>(b));
  std::uint16_t crc = crc16(out);
  out.push_back(static_cast<char>(crc >> 8));
  out.push_back(static_cast<char>(crc & 0xFF));
  return out;
}

std::optional<Packet> decode_packet(std::string_view bytes) {
  if (bytes.size() < 4) return std::nullopt;
  std::string_view body = bytes.substr(0, bytes.size() - 2);
  std::uint16_t expected = static_cast<std::uint16_t>((static_cast<std::uint8_t>(bytes[bytes.size() - 2]) << 8) |
                                                      static_cast<std::uint8_t>(bytes.back()));
  if (crc16(body) != expected) return std::nullopt;
  Packet p;
  p.address = static_cast<std::uint8_t>(body[0]);
  p.opcode = static_cast<std::uint8_t>(body[1]);
  p.payload.assign(body.begin() + 2, body.end());
  return p;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  return (static_cast<std::uint32_t>(in[at]) << 24) | (static_cast<std::uint32_t>(in[at + 1]) << 16) |
         (static_cast<std::uint32_t>(in[at + 2]) << 8) | in[at + 3];
}

RequestParser::Result RequestParser::feed(std::string_view bytes) {
  buffer_.append(bytes);
  Result result;
  std::size_t pos = 0;
  while (buffer_.size() - pos >= 2) {
    auto info = opcode_info(static_cast<std::uint8_t>(buffer_[pos + 1]));
    if (!info) {
      ++pos;
      ++result.dropped_bytes;
      continue;
    }
    std::size_t total = 2 + info->request_payload + 2;
    if (buffer_.size() - pos < total) break;
    auto packet = decode_packet(std::string_view(buffer_).substr(pos, total));
    if (!packet) {
      ++result.crc_failures;
      ++pos;
      ++result.dropped_bytes;
      continue;
    }
    result.packets.push_back(std::move(*packet));
    pos += total;
  }
  buffer_.erase(0, pos);
  return result;
}

}  // namespace jenny5::roboclaw
