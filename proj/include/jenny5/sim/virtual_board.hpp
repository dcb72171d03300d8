#pragma once

// A simulated Scufy board. Frames go in through submit(), simulated time moves
// through tick(), and every response leaves through the frames tick() returns.

#include "jenny5/model/drivetrain.hpp"
#include "jenny5/scufy/protocol.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jenny5::sim {

using model::Rational;
using scufy::SensorAttachSpec;
using scufy::SensorKind;

struct SensorRef {
  SensorKind kind = SensorKind::AS5147;
  int index = 0;
  auto operator<=>(const SensorRef&) const = default;
};

/// Ties a sensor to a stepper through the drivetrain:
///   reading = offset + direction · units_per_step · motor_position
/// `direction` is the physical sense of the wiring. The direction carried by
/// an attach command is what the host believes, and is only echoed back.
struct JointBinding {
  int motor = 0;
  SensorRef sensor;
  Rational units_per_step{1};
  Rational offset{0};
  int direction = 1;

  Rational reading_at(std::int64_t position) const {
    return offset + Rational(direction) * units_per_step * Rational(position);
  }
};

struct BoardConfig {
  std::string firmware_version = "2019.05.10.0";
  std::int64_t counts_per_rev = 360;
  std::vector<JointBinding> bindings;
  std::int32_t unbound_sensor_reading = 0;
  std::int32_t default_servo_home = 90;
  std::map<int, std::int32_t> servo_homes;
  std::int32_t default_ultrasonic_cm = 100;
  std::map<int, std::int32_t> ultrasonic_cm;
  std::uint32_t default_max_speed = 1000;     // steps/s
  std::uint32_t default_acceleration = 1000;  // steps/s², 0 = unlimited
  double tick_hz = 200.0;
};

enum class StepperState { Disabled, Locked, Moving };

struct StepperMotorSim {
  scufy::PinTriple pins;
  std::int64_t current_position = 0;  // whole steps
  std::int64_t target_position = 0;
  double velocity = 0.0;  // steps/s, signed
  std::uint32_t max_speed = 1000;
  std::uint32_t acceleration = 1000;
  StepperState state = StepperState::Disabled;
  std::vector<SensorAttachSpec> attached;
  double exact_position = 0.0;  // integrator state, current_position == round(exact_position)

  enum class Completion { None, Move, Home };
  Completion pending = Completion::None;
  double peak_speed = 0.0;  // largest |velocity| seen, for diagnostics
};

struct ServoSim {
  int pin = 0;
  std::int32_t position = 90;
  std::int32_t home = 90;
};

struct AS5147Sim {
  int pin = 0;
};

class VirtualBoard {
 public:
  explicit VirtualBoard(BoardConfig config = {});

  /// Queues a raw frame (including its '#'). Malformed frames answer E#.
  void submit(std::string_view frame);
  /// Records a frame that could not be delivered intact; answers E#.
  void reject();

  /// Advances time by dt seconds (0 < dt <= 0.1) and returns emitted frames.
  std::vector<std::string> tick(double dt);

  double now() const { return clock_; }
  const BoardConfig& config() const { return config_; }

  std::size_t stepper_count() const { return steppers_.size(); }
  const StepperMotorSim& stepper(int index) const { return steppers_.at(static_cast<std::size_t>(index)); }
  std::size_t servo_count() const { return servos_.size(); }
  const ServoSim& servo(int index) const { return servos_.at(static_cast<std::size_t>(index)); }
  std::size_t as5147_count() const { return as5147s_.size(); }
  bool any_moving() const;

  /// Exact sensor value derived from its binding, nullopt if unbound.
  std::optional<Rational> sensor_value(SensorRef sensor) const;
  /// What RA would report: rounded binding value or the unbound default.
  std::int32_t as5147_reading(int index) const;

  const JointBinding* binding_for(SensorRef sensor) const;

 private:
  void execute(const scufy::Command& command);
  void emit(const scufy::Response& response);
  void error();
  bool valid_stepper(int index) const;
  const JointBinding* positional_binding(int motor_index, const SensorAttachSpec& spec) const;
  void start_motion(int index, std::int64_t target, StepperMotorSim::Completion completion);
  void halt(StepperMotorSim& motor);
  void integrate(int index, double dt);
  /// Integer step interval allowed by the positional guards, if any.
  std::pair<std::optional<std::int64_t>, std::optional<std::int64_t>> guard_interval(int index) const;

  BoardConfig config_;
  double clock_ = 0.0;
  std::deque<std::string> inbound_;
  std::vector<std::string> outbound_;

  bool steppers_created_ = false;
  bool servos_created_ = false;
  bool as5147s_created_ = false;
  std::vector<StepperMotorSim> steppers_;
  std::vector<ServoSim> servos_;
  std::vector<AS5147Sim> as5147s_;
};

}  // namespace jenny5::sim
