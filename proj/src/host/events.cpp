#include "jenny5/host/events.hpp"

#include <algorithm>

namespace jenny5::host {

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::IsAlive: return "IS_ALIVE";
    case EventType::SteppersControllerCreated: return "STEPPER_MOTORS_CONTROLLER_CREATED";
    case EventType::ServosControllerCreated: return "SERVOS_CONTROLLER_CREATED";
    case EventType::AS5147ControllerCreated: return "AS5147S_CONTROLLER_CREATED";
    case EventType::SensorsAttached: return "ATTACH_SENSORS";
    case EventType::StepperMoveDone: return "STEPPER_MOTOR_MOVE_DONE";
    case EventType::StepperHomed: return "STEPPER_MOTOR_HOME_DONE";
    case EventType::StepperStopped: return "STEPPER_MOTOR_STOPPED";
    case EventType::StepperLocked: return "STEPPER_MOTOR_LOCKED";
    case EventType::StepperDisabled: return "STEPPER_MOTOR_DISABLED";
    case EventType::SpeedAccelSet: return "STEPPER_MOTOR_SET_SPEED_ACCELL_DONE";
    case EventType::ServoMoveDone: return "SERVO_MOTOR_MOVE_DONE";
    case EventType::ServoHomed: return "SERVO_MOTOR_HOME_DONE";
    case EventType::AS5147Read: return "AS5147_READ";
    case EventType::UltrasonicRead: return "ULTRASONIC_READ";
    case EventType::SensorsRemoved: return "SENSORS_REMOVED";
    case EventType::ErrorReceived: return "ERROR";
    case EventType::InfoReceived: return "INFO";
    case EventType::VersionReceived: return "VERSION";
  }
  return "UNKNOWN";
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

DeviceEvent event_from_response(const scufy::Response& response, std::int64_t text_handle) {
  using namespace scufy;
  return std::visit(
      Overloaded{
          [](const rsp::Alive&) { return DeviceEvent{EventType::IsAlive, 0, 0}; },
          [&](const rsp::Version&) { return DeviceEvent{EventType::VersionReceived, 0, text_handle}; },
          [](const rsp::SteppersCreated&) { return DeviceEvent{EventType::SteppersControllerCreated, 0, 0}; },
          [](const rsp::ServosCreated&) { return DeviceEvent{EventType::ServosControllerCreated, 0, 0}; },
          [](const rsp::AS5147sCreated&) { return DeviceEvent{EventType::AS5147ControllerCreated, 0, 0}; },
          [](const rsp::SensorsAttached& r) { return DeviceEvent{EventType::SensorsAttached, r.motor, 0}; },
          [](const rsp::StepperMoveDone& r) {
            return DeviceEvent{EventType::StepperMoveDone, r.motor, static_cast<std::int64_t>(r.distance_to_go)};
          },
          [](const rsp::StepperHomed& r) { return DeviceEvent{EventType::StepperHomed, r.motor, 0}; },
          [](const rsp::StepperDisabled& r) { return DeviceEvent{EventType::StepperDisabled, r.motor, 0}; },
          [](const rsp::StepperLocked& r) { return DeviceEvent{EventType::StepperLocked, r.motor, 0}; },
          [](const rsp::SpeedAccelSet& r) { return DeviceEvent{EventType::SpeedAccelSet, r.motor, 0}; },
          [](const rsp::StepperStopped& r) { return DeviceEvent{EventType::StepperStopped, r.motor, 0}; },
          [](const rsp::ServoMoveDone& r) { return DeviceEvent{EventType::ServoMoveDone, r.servo, r.clamped}; },
          [](const rsp::ServoHomed& r) { return DeviceEvent{EventType::ServoHomed, r.servo, 0}; },
          [](const rsp::AS5147Reading& r) { return DeviceEvent{EventType::AS5147Read, r.sensor, r.angle}; },
          [](const rsp::UltrasonicReading& r) {
            return DeviceEvent{EventType::UltrasonicRead, r.sensor, r.distance_cm};
          },
          [](const rsp::SensorsRemoved& r) { return DeviceEvent{EventType::SensorsRemoved, r.motor, 0}; },
          [](const rsp::Error&) { return DeviceEvent{EventType::ErrorReceived, 0, 0}; },
          [&](const rsp::Info&) { return DeviceEvent{EventType::InfoReceived, 0, text_handle}; },
      },
      response);
}

std::optional<DeviceEvent> EventQueue::take(EventType type) {
  auto it = std::find_if(events_.begin(), events_.end(), [&](const auto& e) { return e.type == type; });
  if (it == events_.end()) return std::nullopt;
  DeviceEvent found = *it;
  events_.erase(it);
  return found;
}

std::optional<DeviceEvent> EventQueue::take(EventType type, int required_param1) {
  auto it = std::find_if(events_.begin(), events_.end(),
                         [&](const auto& e) { return e.type == type && e.param1 == required_param1; });
  if (it == events_.end()) return std::nullopt;
  DeviceEvent found = *it;
  events_.erase(it);
  return found;
}

}  // namespace jenny5::host
