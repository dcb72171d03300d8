#pragma once

// RoboClaw packet serial framing.
//
//   request  [address][opcode][payload...][crc_hi][crc_lo]
//   reply    [address][opcode][payload...][crc_hi][crc_lo]
//
// CRC-16/XMODEM (poly 0x1021, init 0) over address, opcode and payload.
// Multi-byte fields are big-endian. Write commands are acknowledged with an
// empty-payload reply; a packet with a bad CRC gets no reply at all.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jenny5::roboclaw {

inline constexpr std::uint8_t kDefaultAddress = 0x80;
inline constexpr std::size_t kFirmwareFieldSize = 48;

enum class Opcode : std::uint8_t {
  DriveForwardM1 = 0,
  DriveBackwardM1 = 1,
  DriveForwardM2 = 4,
  DriveBackwardM2 = 5,
  ReadFirmwareVersion = 21,
  ReadMainBattery = 24,
  ReadMotorPwm = 48,
  ReadMotorCurrents = 49,
  DriveM1DutyAccel = 52,
  DriveM2DutyAccel = 53,
  ReadTemperature = 82,
  SetM1MaxCurrent = 133,
  SetM2MaxCurrent = 134,
  ReadM1MaxCurrent = 135,
  ReadM2MaxCurrent = 136,
  // Not a vendor command: linear actuator position of each channel, fraction x 10000.
  ReadActuatorPositions = 240,
};

struct OpcodeInfo {
  Opcode opcode;
  std::string_view name;
  std::size_t request_payload;
  std::size_t reply_payload;
};

/// Table lookup; nullopt for opcodes this stack does not speak.
std::optional<OpcodeInfo> opcode_info(std::uint8_t opcode);
std::span<const OpcodeInfo> opcode_table();

std::uint16_t crc16(std::span<const std::uint8_t> bytes, std::uint16_t crc = 0);
std::uint16_t crc16(std::string_view bytes, std::uint16_t crc = 0);

struct Packet {
  std::uint8_t address = kDefaultAddress;
  std::uint8_t opcode = 0;
  std::vector<std::uint8_t> payload;
  bool operator==(const Packet&) const = default;
};

/// Serialized packet with its CRC appended.
std::string encode_packet(const Packet& packet);

/// Checks the trailing CRC of a complete packet and strips it.
std::optional<Packet> decode_packet(std::string_view bytes);

// Big-endian field helpers.
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at);
std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at);

/// Splits a request byte stream using the opcode table for lengths. Unknown
/// opcodes and CRC failures drop bytes until the stream resynchronizes.
class RequestParser {
 public:
  struct Result {
    std::vector<Packet> packets;
    std::size_t crc_failures = 0;
    std::size_t dropped_bytes = 0;
  };

  Result feed(std::string_view bytes);
  void reset() { buffer_.clear(); }
  std::size_t pending() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

}  // namespace jenny5::roboclaw
