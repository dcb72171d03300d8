#include "jenny5/roboclaw/emulator.hpp"

#include "jenny5/roboclaw/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace jenny5::roboclaw {

BoardConfig platform_board() { return BoardConfig{}; }

BoardConfig leg_board() {
  BoardConfig c;
  c.name = "leg";
  c.address = 0x81;
  c.firmware = "USB Roboclaw 2x7a v4.1.34\n";
  c.rated_current_a = 7.0;
  c.load_a = {3.0, 3.0};
  c.actuator = ActuatorConfig{};
  return c;
}

std::optional<BoardConfig> builtin_board(std::string_view name) {
  if (name == "platform") return platform_board();
  if (name == "leg") return leg_board();
  return std::nullopt;
}

BoardConfig board_config_from_json(const nlohmann::json& doc) {
  BoardConfig c = platform_board();
  if (doc.contains("preset")) {
    auto preset = builtin_board(doc.at("preset").get<std::string>());
    if (!preset) throw std::invalid_argument("unknown RoboClaw preset: " + doc.at("preset").dump());
    c = *preset;
  }
  c.name = doc.value("name", c.name);
  c.address = doc.value("address", c.address);
  if (doc.contains("firmware")) {
    c.firmware = doc.at("firmware").get<std::string>();
    if (!c.firmware.empty() && c.firmware.back() != '\n') c.firmware += '\n';
  }
  c.temperature_c = doc.value("temperature_c", c.temperature_c);
  c.battery_v = doc.value("battery_v", c.battery_v);
  c.rated_current_a = doc.value("rated_current_a", c.rated_current_a);
  if (doc.contains("load_a")) c.load_a = doc.at("load_a").get<std::array<double, 2>>();
  if (doc.contains("actuator")) {
    const auto& a = doc.at("actuator");
    if (a.is_null()) {
      c.actuator.reset();
    } else {
      ActuatorConfig ac = c.actuator.value_or(ActuatorConfig{});
      ac.full_travel_s = a.value("full_travel_s", ac.full_travel_s);
      ac.min_height_cm = a.value("min_height_cm", ac.min_height_cm);
      ac.max_height_cm = a.value("max_height_cm", ac.max_height_cm);
      ac.initial_fraction = a.value("initial_fraction", ac.initial_fraction);
      if (!(ac.full_travel_s > 0)) throw std::invalid_argument("actuator full_travel_s must be positive");
      c.actuator = ac;
    }
  }
  if (c.firmware.size() > kFirmwareFieldSize - 1) throw std::invalid_argument("firmware text exceeds 47 bytes");
  return c;
}

BoardConfig load_board_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return board_config_from_json(nlohmann::json::parse(in));
}

int Emulator::Channel::pwm_raw() const {
  return static_cast<int>(std::lround(std::clamp(pwm, -double(units::kMaxDuty), double(units::kMaxDuty))));
}

Emulator::Emulator(BoardConfig config) : config_(std::move(config)) {
  for (auto& ch : channels_) {
    ch.max_current_raw = units::current_raw(config_.rated_current_a);
    if (config_.actuator) ch.actuator_fraction = std::clamp(config_.actuator->initial_fraction, 0.0, 1.0);
  }
}

std::string Emulator::on_bytes(std::string_view bytes) {
  auto parsed = parser_.feed(bytes);
  crc_failures_ += parsed.crc_failures;
  std::string out;
  for (const auto& p : parsed.packets) {
    if (auto reply = handle(p)) out += encode_packet(*reply);
  }
  return out;
}

std::string Emulator::tick(double dt) {
  advance(dt);
  return {};
}

std::uint32_t Emulator::current_raw(int index) const {
  const auto& ch = channel(index);
  double amps = config_.load_a.at(static_cast<std::size_t>(index)) * std::abs(ch.pwm_raw()) / units::kMaxDuty;
  return std::min(units::current_raw(amps), ch.max_current_raw);
}

std::optional<double> Emulator::actuator_height_cm(int index) const {
  if (!config_.actuator) return std::nullopt;
  const auto& a = *config_.actuator;
  return a.min_height_cm + (a.max_height_cm - a.min_height_cm) * channel(index).actuator_fraction;
}

void Emulator::advance(double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  for (auto& ch : channels_) {
    double before = ch.pwm;
    double target = std::clamp(double(ch.target_duty), -double(units::kMaxDuty), double(units::kMaxDuty));
    if (ch.mode == Mode::Speed) {
      ch.pwm = target;
    } else {
      double step = double(ch.acceleration) * dt;
      ch.pwm = before + std::clamp(target - before, -step, step);
    }
    if (config_.actuator) {
      double mean = (before + ch.pwm) / 2 / units::kMaxDuty;
      ch.actuator_fraction = std::clamp(ch.actuator_fraction + mean * dt / config_.actuator->full_travel_s, 0.0, 1.0);
    }
  }
  time_ += dt;
}

std::optional<Packet> Emulator::handle(const Packet& request) {
  if (request.address != config_.address) return std::nullopt;
  auto info = opcode_info(request.opcode);
  if (!info || request.payload.size() != info->request_payload) return std::nullopt;

  Packet reply{request.address, request.opcode, {}};
  const auto& in = request.payload;
  auto drive_speed = [&](int index, int sign) -> std::optional<Packet> {
    int speed = in[0];
    if (speed > units::kMaxSpeed) return std::nullopt;
    auto& ch = channel(index);
    ch.mode = Mode::Speed;
    ch.target_duty = sign * units::speed_to_duty(speed);
    ch.pwm = ch.target_duty;
    return reply;
  };
  auto drive_duty = [&](int index) -> std::optional<Packet> {
    auto duty = static_cast<std::int16_t>(get_u16(in, 0));
    std::uint32_t accel = get_u32(in, 2);
    if (accel > units::kMaxAcceleration) return std::nullopt;
    auto& ch = channel(index);
    ch.mode = Mode::Duty;
    ch.target_duty = duty;
    ch.acceleration = accel;
    return reply;
  };

  switch (info->opcode) {
    case Opcode::DriveForwardM1: return drive_speed(0, +1);
    case Opcode::DriveBackwardM1: return drive_speed(0, -1);
    case Opcode::DriveForwardM2: return drive_speed(1, +1);
    case Opcode::DriveBackwardM2: return drive_speed(1, -1);
    case Opcode::DriveM1DutyAccel: return drive_duty(0);
    case Opcode::DriveM2DutyAccel: return drive_duty(1);
    case Opcode::ReadFirmwareVersion: {
      std::string text = config_.firmware;
      if (text.empty() || text.back() != '\n') text += '\n';
      text.resize(std::min(text.size(), kFirmwareFieldSize - 1));
      reply.payload.assign(text.begin(), text.end());
      reply.payload.resize(kFirmwareFieldSize, 0);
      return reply;
    }
    case Opcode::ReadMainBattery:
      put_u16(reply.payload, units::battery_raw(config_.battery_v));
      return reply;
    case Opcode::ReadTemperature:
      put_u16(reply.payload, static_cast<std::uint16_t>(units::temperature_raw(config_.temperature_c)));
      return reply;
    case Opcode::ReadMotorPwm:
      put_u16(reply.payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(channels_[0].pwm_raw())));
      put_u16(reply.payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(channels_[1].pwm_raw())));
      return reply;
    case Opcode::ReadMotorCurrents:
      put_u16(reply.payload, static_cast<std::uint16_t>(std::min<std::uint32_t>(current_raw(0), 0xFFFF)));
      put_u16(reply.payload, static_cast<std::uint16_t>(std::min<std::uint32_t>(current_raw(1), 0xFFFF)));
      return reply;
    case Opcode::SetM1MaxCurrent:
      channels_[0].max_current_raw = get_u32(in, 0);
      return reply;
    case Opcode::SetM2MaxCurrent:
      channels_[1].max_current_raw = get_u32(in, 0);
      return reply;
    case Opcode::ReadM1MaxCurrent:
      put_u32(reply.payload, channels_[0].max_current_raw);
      return reply;
    case Opcode::ReadM2MaxCurrent:
      put_u32(reply.payload, channels_[1].max_current_raw);
      return reply;
    case Opcode::ReadActuatorPositions: {
      if (!config_.actuator) return std::nullopt;
      for (const auto& ch : channels_) {
        put_u16(reply.payload, static_cast<std::uint16_t>(std::lround(ch.actuator_fraction * 10000)));
      }
      return reply;
    }
  }
  return std::nullopt;
}

}  // namespace jenny5::roboclaw
