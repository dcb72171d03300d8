#include "jenny5/sim/board_config.hpp"

#include "jenny5/model/presets.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace jenny5::sim {

SensorRef parse_sensor_ref(std::string_view text) {
  if (text.size() < 2) throw std::invalid_argument("bad sensor reference: " + std::string(text));
  SensorRef ref;
  switch (text.front()) {
    case 'A': ref.kind = SensorKind::AS5147; break;
    case 'P': ref.kind = SensorKind::Potentiometer; break;
    case 'B': ref.kind = SensorKind::Button; break;
    case 'I': ref.kind = SensorKind::Infrared; break;
    default: throw std::invalid_argument("bad sensor kind: " + std::string(text));
  }
  auto digits = text.substr(1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ref.index);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || ref.index < 0) {
    throw std::invalid_argument("bad sensor index: " + std::string(text));
  }
  return ref;
}

namespace {

std::map<int, std::int32_t> int_map(const nlohmann::json& object) {
  std::map<int, std::int32_t> out;
  for (const auto& [key, value] : object.items()) out[std::stoi(key)] = value.get<std::int32_t>();
  return out;
}

}  // namespace

BoardConfig board_config_from_json(const nlohmann::json& doc) {
  BoardConfig c;
  c.firmware_version = doc.value("firmware_version", c.firmware_version);
  c.counts_per_rev = doc.value("counts_per_rev", c.counts_per_rev);
  c.tick_hz = doc.value("tick_hz", c.tick_hz);
  c.default_max_speed = doc.value("default_max_speed", c.default_max_speed);
  c.default_acceleration = doc.value("default_acceleration", c.default_acceleration);
  c.unbound_sensor_reading = doc.value("unbound_sensor_reading", c.unbound_sensor_reading);
  if (auto it = doc.find("servos"); it != doc.end()) {
    c.default_servo_home = it->value("default_home", c.default_servo_home);
    if (it->contains("homes")) c.servo_homes = int_map(it->at("homes"));
  }
  if (auto it = doc.find("ultrasonic"); it != doc.end()) {
    c.default_ultrasonic_cm = it->value("default_cm", c.default_ultrasonic_cm);
    if (it->contains("cm")) c.ultrasonic_cm = int_map(it->at("cm"));
  }
  if (c.tick_hz <= 0) throw std::invalid_argument("tick_hz must be positive");

  auto drivetrains = model::load_drivetrains(doc);
  if (auto it = doc.find("bindings"); it != doc.end()) {
    for (const auto& entry : *it) {
      JointBinding b;
      b.motor = entry.at("motor").get<int>();
      b.sensor = parse_sensor_ref(entry.at("sensor").get<std::string>());
      if (entry.contains("units_per_step")) {
        b.units_per_step = model::rational_from_json(entry.at("units_per_step"));
      } else if (entry.contains("drivetrain")) {
        auto name = entry.at("drivetrain").get<std::string>();
        auto found = drivetrains.find(name);
        if (found == drivetrains.end()) throw std::invalid_argument("unknown drivetrain: " + name);
        b.units_per_step = model::binding_units_per_step(found->second, c.counts_per_rev);
      }
      if (entry.contains("offset")) b.offset = model::rational_from_json(entry.at("offset"));
      b.direction = entry.value("direction", 1);
      c.bindings.push_back(b);
    }
  }
  return c;
}

BoardConfig load_board_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return board_config_from_json(nlohmann::json::parse(in));
}

std::string ScufyDevice::on_bytes(std::string_view bytes) {
  auto fed = decoder_.feed(bytes);
  std::size_t next_overflow = 0;
  for (std::size_t i = 0; i <= fed.frames.size(); ++i) {
    while (next_overflow < fed.overflow_positions.size() && fed.overflow_positions[next_overflow] == i) {
      board_.reject();
      ++next_overflow;
    }
    if (i < fed.frames.size()) board_.submit(fed.frames[i]);
  }
  return {};
}

std::string ScufyDevice::tick(double dt) {
  std::string out;
  for (const auto& frame : board_.tick(dt)) out += frame;
  return out;
}

}  // namespace jenny5::sim
