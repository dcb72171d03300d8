#pragma once

// PC-side control library for boards running the Scufy firmware.
//
// Every send_* call writes its frames in a single transport write, so frames
// from different calls never interleave. Responses arrive asynchronously: call
// update_commands_from_serial() often, then look for events with
// query_for_event() or block on wait_for_event().

#include "jenny5/host/events.hpp"
#include "jenny5/scufy/protocol.hpp"
#include "jenny5/transport/transport.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jenny5::host {

using transport::ConnectFailed;
using transport::TransportClosed;

enum class MotorState { Idle, CommandSent, Done };

class UnsupportedFeature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sensor attached to a stepper and guarding its travel.
struct RangeSensor {
  int index = 0;
  std::int32_t low = 0;
  std::int32_t high = 0;
  std::int32_t home = 0;
  int direction = 1;
};

struct ButtonSensor {
  int index = 0;
  int direction = 1;
};

inline constexpr std::chrono::milliseconds kPollInterval{5};
inline constexpr std::chrono::seconds kDefaultWait{3};

class ScufyClient {
 public:
  ScufyClient() = default;
  explicit ScufyClient(std::unique_ptr<transport::ByteTransport> transport);

  /// Opens "tcp://host:port", "host:port" or a serial device path.
  static ScufyClient connect(std::string_view endpoint, unsigned baud = 115200);

  bool is_open() const;
  void close_connection();

  void send_is_alive();
  void send_get_version();

  void send_create_stepper_motors(std::span<const int> dir_pins, std::span<const int> step_pins,
                                  std::span<const int> enable_pins);
  void send_create_as5147s(std::span<const int> pins);
  void send_create_servos(std::span<const int> pins);
  /// No wire command exists for this sensor; always throws UnsupportedFeature.
  void send_create_tera_ranger_one();

  void send_move_stepper_motor(int motor, std::int32_t steps);
  void send_move_stepper_motor2(int m1, std::int32_t s1, int m2, std::int32_t s2);
  void send_move_stepper_motor3(int m1, std::int32_t s1, int m2, std::int32_t s2, int m3, std::int32_t s3);
  void send_move_stepper_motor4(int m1, std::int32_t s1, int m2, std::int32_t s2, int m3, std::int32_t s3,
                                int m4, std::int32_t s4);
  void send_move_stepper_motor_array(std::span<const int> motors, std::span<const std::int32_t> steps);
  void send_go_home_stepper_motor(int motor);
  void send_stop_stepper_motor(int motor);
  void send_stepper_motor_goto_sensor_position(int motor, std::int32_t position);
  void send_lock_stepper_motor(int motor);
  void send_disable_stepper_motor(int motor);
  void send_set_stepper_motor_speed_and_acceleration(int motor, std::uint32_t speed, std::uint32_t acceleration);

  /// One AS frame listing potentiometers, AS5147s, infrared sensors and buttons, in that order.
  void send_attach_sensors_to_stepper_motor(int motor, std::span<const RangeSensor> potentiometers,
                                            std::span<const RangeSensor> as5147s,
                                            std::span<const int> infrared,
                                            std::span<const ButtonSensor> buttons);
  void send_remove_attached_sensors_from_stepper_motor(int motor);

  void send_get_AS5147_position(int sensor);
  void send_get_ultrasonic_distance(int sensor);
  void send_move_servo_motor(int servo, std::int32_t position);
  void send_go_home_servo_motor(int servo);

  /// Drains the transport into the event queue. True iff at least one event was added.
  bool update_commands_from_serial();

  bool query_for_event(EventType type);
  bool query_for_event(EventType type, int& param1);
  bool query_for_event(EventType type, int& param1, std::int64_t& param2);
  /// Matches only an event whose param1 equals `param1`.
  bool query_for_event_with_param(EventType type, int param1);

  /// The update/sleep/query loop with a deadline. Returns false on timeout.
  bool wait_for_event(EventType type, std::chrono::milliseconds timeout = kDefaultWait);
  bool wait_for_event(EventType type, int param1, std::chrono::milliseconds timeout = kDefaultWait);
  /// Same loop, returning the removed event itself.
  std::optional<DeviceEvent> wait_for(EventType type, std::optional<int> param1,
                                      std::chrono::milliseconds timeout = kDefaultWait);

  MotorState get_stepper_motor_state(int motor) const;
  void set_stepper_motor_state(int motor, MotorState state);

  EventQueue& events() { return events_; }
  const EventQueue& events() const { return events_; }
  const std::string& last_version() const { return last_version_; }
  /// Text carried by an Info or Version event's param2.
  std::optional<std::string> text_for(std::int64_t handle) const;

  transport::ByteTransport* transport() { return transport_.get(); }

 private:
  void write_frames(const std::vector<scufy::Command>& commands);
  void mark_sent(int motor);
  void push_frame(const std::string& frame);

  std::unique_ptr<transport::ByteTransport> transport_;
  scufy::FrameDecoder decoder_;
  EventQueue events_;
  std::vector<MotorState> motor_states_;
  std::string last_version_;
  std::map<std::int64_t, std::string> texts_;
  std::int64_t next_handle_ = 1;
};

/// Sends CS for the given pins and waits for the controller-created event.
/// Returns an error message on timeout or transport failure.
std::optional<std::string> create_stepper_motors_controller(ScufyClient& client, std::string_view name,
                                                            std::span<const int> dir_pins,
                                                            std::span<const int> step_pins,
                                                            std::span<const int> enable_pins,
                                                            std::chrono::milliseconds timeout = kDefaultWait);

/// Endpoint from SCUFY_ENDPOINT if set, otherwise `fallback`.
std::string endpoint_from_env(std::string_view fallback);

}  // namespace jenny5::host
