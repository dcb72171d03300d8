#include "jenny5/host/scufy_client.hpp"

#include <cstdlib>
#include <thread>

namespace jenny5::host {

namespace cmd = scufy::cmd;

ScufyClient::ScufyClient(std::unique_ptr<transport::ByteTransport> transport)
    : transport_(std::move(transport)) {}

ScufyClient ScufyClient::connect(std::string_view endpoint, unsigned baud) {
  return ScufyClient(transport::open_endpoint(endpoint, baud));
}

bool ScufyClient::is_open() const { return transport_ && transport_->is_open(); }

void ScufyClient::close_connection() {
  if (transport_) transport_->close();
}

void ScufyClient::write_frames(const std::vector<scufy::Command>& commands) {
  if (!is_open()) throw TransportClosed("scufy client is not connected");
  std::string bytes;
  for (const auto& c : commands) bytes += scufy::encode_command(c);
  if (!bytes.empty()) transport_->write(bytes);
}

void ScufyClient::mark_sent(int motor) { set_stepper_motor_state(motor, MotorState::CommandSent); }

void ScufyClient::send_is_alive() { write_frames({cmd::TestConnection{}}); }

void ScufyClient::send_get_version() { write_frames({cmd::GetVersion{}}); }

void ScufyClient::send_create_stepper_motors(std::span<const int> dir_pins, std::span<const int> step_pins,
                                             std::span<const int> enable_pins) {
  if (dir_pins.empty() || dir_pins.size() != step_pins.size() || dir_pins.size() != enable_pins.size()) {
    throw std::invalid_argument("pin arrays must be non-empty and of equal length");
  }
  cmd::CreateSteppers c;
  for (std::size_t i = 0; i < dir_pins.size(); ++i) {
    c.pins.push_back({dir_pins[i], step_pins[i], enable_pins[i]});
  }
  write_frames({c});
  motor_states_.assign(dir_pins.size(), MotorState::Idle);
}

void ScufyClient::send_create_as5147s(std::span<const int> pins) {
  if (pins.empty()) throw std::invalid_argument("at least one AS5147 pin required");
  write_frames({cmd::CreateAS5147s{{pins.begin(), pins.end()}}});
}

void ScufyClient::send_create_servos(std::span<const int> pins) {
  if (pins.empty()) throw std::invalid_argument("at least one servo pin required");
  write_frames({cmd::CreateServos{{pins.begin(), pins.end()}}});
}

void ScufyClient::send_create_tera_ranger_one() {
  throw UnsupportedFeature("Tera Ranger One has no documented wire command");
}

void ScufyClient::send_move_stepper_motor(int motor, std::int32_t steps) {
  write_frames({cmd::MoveStepper{motor, steps}});
  mark_sent(motor);
}

void ScufyClient::send_move_stepper_motor2(int m1, std::int32_t s1, int m2, std::int32_t s2) {
  const int motors[] = {m1, m2};
  const std::int32_t steps[] = {s1, s2};
  send_move_stepper_motor_array(motors, steps);
}

void ScufyClient::send_move_stepper_motor3(int m1, std::int32_t s1, int m2, std::int32_t s2, int m3,
                                           std::int32_t s3) {
  const int motors[] = {m1, m2, m3};
  const std::int32_t steps[] = {s1, s2, s3};
  send_move_stepper_motor_array(motors, steps);
}

void ScufyClient::send_move_stepper_motor4(int m1, std::int32_t s1, int m2, std::int32_t s2, int m3,
                                           std::int32_t s3, int m4, std::int32_t s4) {
  const int motors[] = {m1, m2, m3, m4};
  const std::int32_t steps[] = {s1, s2, s3, s4};
  send_move_stepper_motor_array(motors, steps);
}

void ScufyClient::send_move_stepper_motor_array(std::span<const int> motors, std::span<const std::int32_t> steps) {
  if (motors.size() != steps.size()) throw std::invalid_argument("motor and step arrays differ in length");
  std::vector<scufy::Command> frames;
  for (std::size_t i = 0; i < motors.size(); ++i) frames.push_back(cmd::MoveStepper{motors[i], steps[i]});
  write_frames(frames);
  for (int m : motors) mark_sent(m);
}

void ScufyClient::send_go_home_stepper_motor(int motor) {
  write_frames({cmd::GoHomeStepper{motor}});
  mark_sent(motor);
}

void ScufyClient::send_stop_stepper_motor(int motor) {
  write_frames({cmd::StopStepper{motor}});
  mark_sent(motor);
}

void ScufyClient::send_stepper_motor_goto_sensor_position(int motor, std::int32_t position) {
  write_frames({cmd::GotoSensorPosition{motor, position}});
  mark_sent(motor);
}

void ScufyClient::send_lock_stepper_motor(int motor) { write_frames({cmd::LockStepper{motor}}); }

void ScufyClient::send_disable_stepper_motor(int motor) { write_frames({cmd::DisableStepper{motor}}); }

void ScufyClient::send_set_stepper_motor_speed_and_acceleration(int motor, std::uint32_t speed,
                                                                std::uint32_t acceleration) {
  write_frames({cmd::SetSpeedAccel{motor, speed, acceleration}});
}

void ScufyClient::send_attach_sensors_to_stepper_motor(int motor, std::span<const RangeSensor> potentiometers,
                                                       std::span<const RangeSensor> as5147s,
                                                       std::span<const int> infrared,
                                                       std::span<const ButtonSensor> buttons) {
  cmd::AttachSensors c;
  c.motor = motor;
  auto ranged = [&](scufy::SensorKind kind, const RangeSensor& s) {
    c.sensors.push_back({kind, s.index, s.low, s.high, s.home, s.direction});
  };
  for (const auto& s : potentiometers) ranged(scufy::SensorKind::Potentiometer, s);
  for (const auto& s : as5147s) ranged(scufy::SensorKind::AS5147, s);
  for (int idx : infrared) c.sensors.push_back({scufy::SensorKind::Infrared, idx, 0, 0, 0, 1});
  for (const auto& b : buttons) c.sensors.push_back({scufy::SensorKind::Button, b.index, 0, 0, 0, b.direction});
  write_frames({c});
}

void ScufyClient::send_remove_attached_sensors_from_stepper_motor(int motor) {
  write_frames({cmd::RemoveAttachedSensors{motor}});
}

void ScufyClient::send_get_AS5147_position(int sensor) { write_frames({cmd::ReadAS5147{sensor}}); }

void ScufyClient::send_get_ultrasonic_distance(int sensor) { write_frames({cmd::ReadUltrasonic{sensor}}); }

void ScufyClient::send_move_servo_motor(int servo, std::int32_t position) {
  write_frames({cmd::MoveServo{servo, position}});
}

void ScufyClient::send_go_home_servo_motor(int servo) { write_frames({cmd::HomeServo{servo}}); }

void ScufyClient::push_frame(const std::string& frame) {
  auto decoded = scufy::decode_response(frame);
  if (!decoded) {
    events_.push(DeviceEvent{EventType::ErrorReceived, -1, 0});
    return;
  }
  const auto& response = decoded.value();
  std::int64_t handle = 0;
  if (const auto* v = std::get_if<scufy::rsp::Version>(&response)) {
    last_version_ = v->text;
    handle = next_handle_++;
    texts_[handle] = v->text;
  } else if (const auto* info = std::get_if<scufy::rsp::Info>(&response)) {
    handle = next_handle_++;
    texts_[handle] = info->text;
  }
  DeviceEvent event = event_from_response(response, handle);
  switch (event.type) {
    case EventType::StepperMoveDone:
    case EventType::StepperHomed:
    case EventType::StepperStopped:
      if (get_stepper_motor_state(event.param1) == MotorState::CommandSent) {
        set_stepper_motor_state(event.param1, MotorState::Done);
      }
      break;
    default:
      break;
  }
  events_.push(event);
}

bool ScufyClient::update_commands_from_serial() {
  if (!is_open()) throw TransportClosed("scufy client is not connected");
  std::string bytes = transport_->read_available();
  if (bytes.empty()) return false;
  auto fed = decoder_.feed(bytes);
  std::size_t before = events_.size();
  std::size_t next_overflow = 0;
  for (std::size_t i = 0; i <= fed.frames.size(); ++i) {
    while (next_overflow < fed.overflow_positions.size() && fed.overflow_positions[next_overflow] == i) {
      events_.push(DeviceEvent{EventType::ErrorReceived, -1, 0});
      ++next_overflow;
    }
    if (i < fed.frames.size()) push_frame(fed.frames[i]);
  }
  return events_.size() > before;
}

bool ScufyClient::query_for_event(EventType type) { return events_.take(type).has_value(); }

bool ScufyClient::query_for_event(EventType type, int& param1) {
  auto e = events_.take(type);
  if (!e) return false;
  param1 = e->param1;
  return true;
}

bool ScufyClient::query_for_event(EventType type, int& param1, std::int64_t& param2) {
  auto e = events_.take(type);
  if (!e) return false;
  param1 = e->param1;
  param2 = e->param2;
  return true;
}

bool ScufyClient::query_for_event_with_param(EventType type, int param1) {
  return events_.take(type, param1).has_value();
}

std::optional<DeviceEvent> ScufyClient::wait_for(EventType type, std::optional<int> param1,
                                                 std::chrono::milliseconds timeout) {
  const auto start = std::chrono::steady_clock::now();
  for (;;) {
    bool fresh = false;
    try {
      fresh = update_commands_from_serial();
    } catch (const TransportClosed&) {
      // events may already be queued
    }
    auto found = param1 ? events_.take(type, *param1) : events_.take(type);
    if (found) return found;
    if (std::chrono::steady_clock::now() - start > timeout) return std::nullopt;
    if (!is_open()) return std::nullopt;
    if (!fresh) std::this_thread::sleep_for(kPollInterval);
  }
}

bool ScufyClient::wait_for_event(EventType type, std::chrono::milliseconds timeout) {
  return wait_for(type, std::nullopt, timeout).has_value();
}

bool ScufyClient::wait_for_event(EventType type, int param1, std::chrono::milliseconds timeout) {
  return wait_for(type, param1, timeout).has_value();
}

MotorState ScufyClient::get_stepper_motor_state(int motor) const {
  if (motor < 0 || static_cast<std::size_t>(motor) >= motor_states_.size()) return MotorState::Idle;
  return motor_states_[static_cast<std::size_t>(motor)];
}

void ScufyClient::set_stepper_motor_state(int motor, MotorState state) {
  if (motor < 0) return;
  if (static_cast<std::size_t>(motor) >= motor_states_.size()) {
    motor_states_.resize(static_cast<std::size_t>(motor) + 1, MotorState::Idle);
  }
  motor_states_[static_cast<std::size_t>(motor)] = state;
}

std::optional<std::string> ScufyClient::text_for(std::int64_t handle) const {
  auto it = texts_.find(handle);
  if (it == texts_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> create_stepper_motors_controller(ScufyClient& client, std::string_view name,
                                                            std::span<const int> dir_pins,
                                                            std::span<const int> step_pins,
                                                            std::span<const int> enable_pins,
                                                            std::chrono::milliseconds timeout) {
  try {
    client.send_create_stepper_motors(dir_pins, step_pins, enable_pins);
  } catch (const TransportClosed& e) {
    return "cannot create " + std::string(name) + " motors controller: " + e.what();
  }
  if (!client.wait_for_event(EventType::SteppersControllerCreated, 0, timeout)) {
    return "cannot create " + std::string(name) + " motors controller: no answer within " +
           std::to_string(timeout.count()) + " ms";
  }
  return std::nullopt;
}

std::string endpoint_from_env(std::string_view fallback) {
  if (const char* env = std::getenv("SCUFY_ENDPOINT"); env && *env) return env;
  return std::string(fallback);
}

}  // namespace jenny5::host
