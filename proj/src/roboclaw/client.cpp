#include "jenny5/roboclaw/client.hpp"

#include "jenny5/roboclaw/units.hpp"

#include <thread>

namespace jenny5::roboclaw {

RoboClawClient::RoboClawClient(std::unique_ptr<transport::ByteTransport> transport, std::uint8_t address)
    : transport_(std::move(transport)), address_(address) {}

const char* RoboClawClient::get_library_version() { return "jenny5-roboclaw 1.0.0"; }

bool RoboClawClient::connect(std::string_view endpoint, unsigned baud_rate) {
  try {
    transport_ = transport::open_endpoint(endpoint, baud_rate);
  } catch (const std::exception&) {
    transport_.reset();
    return false;
  }
  rx_.clear();
  return is_open();
}

void RoboClawClient::close_connection() {
  if (transport_) transport_->close();
}

bool RoboClawClient::is_open() const { return transport_ && transport_->is_open(); }

std::optional<Packet> RoboClawClient::transact(Opcode opcode, std::vector<std::uint8_t> payload) {
  if (!is_open()) return std::nullopt;
  auto info = opcode_info(static_cast<std::uint8_t>(opcode));
  std::size_t expected = 2 + info->reply_payload + 2;
  try {
    rx_.clear();
    // stale bytes from an earlier timed-out exchange
    transport_->read_available();
    transport_->write(encode_packet(Packet{address_, static_cast<std::uint8_t>(opcode), std::move(payload)}));
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (rx_.size() < expected) {
      std::string got = transport_->read_available();
      if (!got.empty()) {
        rx_ += got;
        continue;
      }
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      if (idle_hook_) {
        idle_hook_();
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    }
  } catch (const transport::TransportClosed&) {
    return std::nullopt;
  }
  auto reply = decode_packet(std::string_view(rx_).substr(0, expected));
  rx_.clear();
  if (!reply || reply->address != address_ || reply->opcode != static_cast<std::uint8_t>(opcode)) {
    return std::nullopt;
  }
  return reply;
}

std::optional<double> RoboClawClient::get_board_temperature() {
  auto r = transact(Opcode::ReadTemperature);
  if (!r) return std::nullopt;
  return units::temperature_c(static_cast<std::int16_t>(get_u16(r->payload, 0)));
}

std::optional<double> RoboClawClient::get_main_battery_voltage() {
  auto r = transact(Opcode::ReadMainBattery);
  if (!r) return std::nullopt;
  return units::battery_volts(get_u16(r->payload, 0));
}

std::optional<std::string> RoboClawClient::get_firmware_version() {
  auto r = transact(Opcode::ReadFirmwareVersion);
  if (!r) return std::nullopt;
  std::string text(r->payload.begin(), r->payload.end());
  auto nul = text.find('\0');
  if (nul != std::string::npos) text.resize(nul + 1);
  return text;
}

bool RoboClawClient::drive_speed(Opcode opcode, int speed) {
  if (speed < 0 || speed > units::kMaxSpeed) return false;
  return transact(opcode, {static_cast<std::uint8_t>(speed)}).has_value();
}

bool RoboClawClient::drive_forward_M1(int speed) { return drive_speed(Opcode::DriveForwardM1, speed); }
bool RoboClawClient::drive_forward_M2(int speed) { return drive_speed(Opcode::DriveForwardM2, speed); }
bool RoboClawClient::drive_backward_M1(int speed) { return drive_speed(Opcode::DriveBackwardM1, speed); }
bool RoboClawClient::drive_backward_M2(int speed) { return drive_speed(Opcode::DriveBackwardM2, speed); }

std::optional<ChannelPair> RoboClawClient::get_motors_current_consumption() {
  auto r = transact(Opcode::ReadMotorCurrents);
  if (!r) return std::nullopt;
  return ChannelPair{units::current_amps(get_u16(r->payload, 0)), units::current_amps(get_u16(r->payload, 2))};
}

std::optional<std::pair<int, int>> RoboClawClient::read_motor_PWM_raw() {
  auto r = transact(Opcode::ReadMotorPwm);
  if (!r) return std::nullopt;
  return std::pair<int, int>{static_cast<std::int16_t>(get_u16(r->payload, 0)),
                             static_cast<std::int16_t>(get_u16(r->payload, 2))};
}

std::optional<ChannelPair> RoboClawClient::read_motor_PWM() {
  auto raw = read_motor_PWM_raw();
  if (!raw) return std::nullopt;
  return ChannelPair{units::duty_percent(raw->first), units::duty_percent(raw->second)};
}

bool RoboClawClient::drive_duty(Opcode opcode, int duty, std::uint32_t acceleration) {
  if (duty < units::kMinDuty || duty > units::kMaxDuty || acceleration > units::kMaxAcceleration) return false;
  std::vector<std::uint8_t> payload;
  put_u16(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(duty)));
  put_u32(payload, acceleration);
  return transact(opcode, std::move(payload)).has_value();
}

bool RoboClawClient::drive_M1_with_signed_duty_and_acceleration(int duty, std::uint32_t acceleration) {
  return drive_duty(Opcode::DriveM1DutyAccel, duty, acceleration);
}

bool RoboClawClient::drive_M2_with_signed_duty_and_acceleration(int duty, std::uint32_t acceleration) {
  return drive_duty(Opcode::DriveM2DutyAccel, duty, acceleration);
}

bool RoboClawClient::set_current(Opcode opcode, double amps) {
  if (!(amps >= 0) || amps > 1e6) return false;
  std::vector<std::uint8_t> payload;
  put_u32(payload, units::current_raw(amps));
  return transact(opcode, std::move(payload)).has_value();
}

bool RoboClawClient::set_M1_max_current_limit(double amps) { return set_current(Opcode::SetM1MaxCurrent, amps); }
bool RoboClawClient::set_M2_max_current_limit(double amps) { return set_current(Opcode::SetM2MaxCurrent, amps); }

std::optional<double> RoboClawClient::read_current_limit(Opcode opcode) {
  auto r = transact(opcode);
  if (!r) return std::nullopt;
  return units::current_amps(get_u32(r->payload, 0));
}

std::optional<double> RoboClawClient::read_M1_max_current_limit() {
  return read_current_limit(Opcode::ReadM1MaxCurrent);
}
std::optional<double> RoboClawClient::read_M2_max_current_limit() {
  return read_current_limit(Opcode::ReadM2MaxCurrent);
}

std::optional<ChannelPair> RoboClawClient::read_actuator_positions() {
  auto r = transact(Opcode::ReadActuatorPositions);
  if (!r) return std::nullopt;
  return ChannelPair{get_u16(r->payload, 0) / 10000.0, get_u16(r->payload, 2) / 10000.0};
}

}  // namespace jenny5::roboclaw
