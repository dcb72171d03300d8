#pragma once

// Host-side RoboClaw client. Every call is a synchronous request/reply with a
// bounded wait; failures are reported as false / nullopt.

#include "jenny5/roboclaw/packet.hpp"
#include "jenny5/transport/transport.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace jenny5::roboclaw {

struct ChannelPair {
  double m1 = 0;
  double m2 = 0;
};

class RoboClawClient {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{200};

  RoboClawClient() = default;
  explicit RoboClawClient(std::unique_ptr<transport::ByteTransport> transport,
                          std::uint8_t address = kDefaultAddress);

  static const char* get_library_version();

  /// "tcp://host:port", "host:port" or a serial device.
  bool connect(std::string_view endpoint, unsigned baud_rate = 38400);
  void close_connection();
  bool is_open() const;

  void set_address(std::uint8_t address) { address_ = address; }
  std::uint8_t address() const { return address_; }
  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }
  /// Called while waiting for a reply; lets in-process tests advance a loopback device.
  void set_idle_hook(std::function<void()> hook) { idle_hook_ = std::move(hook); }

  std::optional<double> get_board_temperature();
  std::optional<double> get_main_battery_voltage();
  /// Text up to and including the terminating "\n\0"; at most 48 bytes.
  std::optional<std::string> get_firmware_version();

  bool drive_forward_M1(int speed);
  bool drive_forward_M2(int speed);
  bool drive_backward_M1(int speed);
  bool drive_backward_M2(int speed);

  /// Amps.
  std::optional<ChannelPair> get_motors_current_consumption();
  /// Duty cycle percent.
  std::optional<ChannelPair> read_motor_PWM();
  std::optional<std::pair<int, int>> read_motor_PWM_raw();

  bool drive_M1_with_signed_duty_and_acceleration(int duty, std::uint32_t acceleration);
  bool drive_M2_with_signed_duty_and_acceleration(int duty, std::uint32_t acceleration);

  bool set_M1_max_current_limit(double amps);
  bool set_M2_max_current_limit(double amps);
  std::optional<double> read_M1_max_current_limit();
  std::optional<double> read_M2_max_current_limit();

  /// Actuator extension of each channel in [0, 1]; leg boards only.
  std::optional<ChannelPair> read_actuator_positions();

 private:
  std::optional<Packet> transact(Opcode opcode, std::vector<std::uint8_t> payload = {});
  bool drive_speed(Opcode opcode, int speed);
  bool drive_duty(Opcode opcode, int duty, std::uint32_t acceleration);
  bool set_current(Opcode opcode, double amps);
  std::optional<double> read_current_limit(Opcode opcode);

  std::unique_ptr<transport::ByteTransport> transport_;
  std::uint8_t address_ = kDefaultAddress;
  std::chrono::milliseconds timeout_ = kDefaultTimeout;
  std::function<void()> idle_hook_;
  std::string rx_;
};

}  // namespace jenny5::roboclaw
