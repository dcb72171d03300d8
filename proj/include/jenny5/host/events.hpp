#pragma once

#include "jenny5/scufy/protocol.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>

namespace jenny5::host {

enum class EventType {
  IsAlive,
  SteppersControllerCreated,
  ServosControllerCreated,
  AS5147ControllerCreated,
  SensorsAttached,
  StepperMoveDone,
  StepperHomed,
  StepperStopped,
  StepperLocked,
  StepperDisabled,
  SpeedAccelSet,
  ServoMoveDone,
  ServoHomed,
  AS5147Read,
  UltrasonicRead,
  SensorsRemoved,
  ErrorReceived,
  InfoReceived,
  VersionReceived,
};

std::string_view to_string(EventType type);

/// param1 is the motor/sensor index (0 for board-wide events, -1 for frames
/// that did not parse). param2 carries the distance to go, reading, servo
/// flag, or a text handle for Info/Version events.
struct DeviceEvent {
  EventType type = EventType::IsAlive;
  int param1 = 0;
  std::int64_t param2 = 0;
  bool operator==(const DeviceEvent&) const = default;
};

/// Total mapping from firmware responses to events. `text_handle` is stored
/// in param2 for responses that carry text.
DeviceEvent event_from_response(const scufy::Response& response, std::int64_t text_handle = 0);

/// FIFO of received events. Queries remove the first match only.
class EventQueue {
 public:
  void push(const DeviceEvent& event) { events_.push_back(event); }

  std::optional<DeviceEvent> take(EventType type);
  std::optional<DeviceEvent> take(EventType type, int required_param1);

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  void clear() { events_.clear(); }
  const std::deque<DeviceEvent>& items() const { return events_; }

 private:
  std::deque<DeviceEvent> events_;
};

}  // namespace jenny5::host
