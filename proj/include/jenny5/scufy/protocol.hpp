#pragma once

// Scufy wire grammar: ASCII, space separated, every frame terminated by '#'.
//
//   T#                         test connection        -> T#
//   V#                         firmware version       -> V2019.05.10.0#
//   CS n d0 s0 e0 ...#         create steppers        -> CS#
//   CV n p0 ...#               create servos          -> CV#
//   CA n p0 ...#               create AS5147s         -> CA#
//   ASx n A0 e1 e2 h dir ...#  attach sensors         -> ASx#
//   SMx y#  SGx pos#           move / goto sensor     -> SMx d#
//   SHx# SDx# SLx# STx#        home/disable/lock/stop -> SHx# SDx# SLx# STx#
//   SSx speed accel#           speed and acceleration -> SSx#
//   VMx pos#  VHx#             servo move / home      -> VMx d#  VHx#
//   RAx#                       read AS5147            -> RAx angle#
//   RUx#  ADx#                 protocol extensions    -> RUx cm#  ADx#
//
// Opcodes that address a motor or sensor carry the index juxtaposed ("SM1").

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace jenny5::scufy {

inline constexpr char kTerminator = '#';
inline constexpr int kMaxIndex = 254;
inline constexpr int kMaxPin = 255;

enum class SensorKind : char {
  AS5147 = 'A',
  Potentiometer = 'P',
  Button = 'B',
  Infrared = 'I',
};

/// A sensor attached to a stepper. Only AS5147 and potentiometer entries
/// carry end1/end2/home; the guard range is [min(end1,end2), max(end1,end2)].
struct SensorAttachSpec {
  SensorKind kind = SensorKind::AS5147;
  int index = 0;
  std::int32_t end1 = 0;
  std::int32_t end2 = 0;
  std::int32_t home = 0;
  int direction = 1;

  bool is_positional() const {
    return kind == SensorKind::AS5147 || kind == SensorKind::Potentiometer;
  }
  std::int32_t low() const { return end1 < end2 ? end1 : end2; }
  std::int32_t high() const { return end1 < end2 ? end2 : end1; }

  bool operator==(const SensorAttachSpec&) const = default;
};

struct PinTriple {
  int dir_pin = 0;
  int step_pin = 0;
  int enable_pin = 0;
  bool operator==(const PinTriple&) const = default;
};

namespace cmd {
struct TestConnection { bool operator==(const TestConnection&) const = default; };
struct GetVersion { bool operator==(const GetVersion&) const = default; };
struct CreateSteppers {
  std::vector<PinTriple> pins;
  bool operator==(const CreateSteppers&) const = default;
};
struct CreateServos {
  std::vector<int> pins;
  bool operator==(const CreateServos&) const = default;
};
struct CreateAS5147s {
  std::vector<int> pins;
  bool operator==(const CreateAS5147s&) const = default;
};
struct AttachSensors {
  int motor = 0;
  std::vector<SensorAttachSpec> sensors;
  bool operator==(const AttachSensors&) const = default;
};
struct MoveStepper {
  int motor = 0;
  std::int32_t steps = 0;
  bool operator==(const MoveStepper&) const = default;
};
struct GoHomeStepper { int motor = 0; bool operator==(const GoHomeStepper&) const = default; };
struct DisableStepper { int motor = 0; bool operator==(const DisableStepper&) const = default; };
struct LockStepper { int motor = 0; bool operator==(const LockStepper&) const = default; };
struct SetSpeedAccel {
  int motor = 0;
  std::uint32_t speed = 0;
  std::uint32_t acceleration = 0;
  bool operator==(const SetSpeedAccel&) const = default;
};
struct StopStepper { int motor = 0; bool operator==(const StopStepper&) const = default; };
struct GotoSensorPosition {
  int motor = 0;
  std::int32_t position = 0;
  bool operator==(const GotoSensorPosition&) const = default;
};
struct MoveServo {
  int servo = 0;
  std::int32_t position = 0;
  bool operator==(const MoveServo&) const = default;
};
struct HomeServo { int servo = 0; bool operator==(const HomeServo&) const = default; };
struct ReadAS5147 { int sensor = 0; bool operator==(const ReadAS5147&) const = default; };
// Extension: HC-SR04 read.
struct ReadUltrasonic { int sensor = 0; bool operator==(const ReadUltrasonic&) const = default; };
// Extension: detach every sensor from a stepper.
struct RemoveAttachedSensors { int motor = 0; bool operator==(const RemoveAttachedSensors&) const = default; };
}  // namespace cmd

using Command =
    std::variant<cmd::TestConnection, cmd::GetVersion, cmd::CreateSteppers, cmd::CreateServos,
                 cmd::CreateAS5147s, cmd::AttachSensors, cmd::MoveStepper, cmd::GoHomeStepper,
                 cmd::DisableStepper, cmd::LockStepper, cmd::SetSpeedAccel, cmd::StopStepper,
                 cmd::GotoSensorPosition, cmd::MoveServo, cmd::HomeServo, cmd::ReadAS5147,
                 cmd::ReadUltrasonic, cmd::RemoveAttachedSensors>;

namespace rsp {
struct Alive { bool operator==(const Alive&) const = default; };
struct Version {
  std::string text;  // year.month.day.build
  bool operator==(const Version&) const = default;
};
struct SteppersCreated { bool operator==(const SteppersCreated&) const = default; };
struct ServosCreated { bool operator==(const ServosCreated&) const = default; };
struct AS5147sCreated { bool operator==(const AS5147sCreated&) const = default; };
struct SensorsAttached { int motor = 0; bool operator==(const SensorsAttached&) const = default; };
struct StepperMoveDone {
  int motor = 0;
  std::uint32_t distance_to_go = 0;  // 0 iff the move completed
  bool operator==(const StepperMoveDone&) const = default;
};
struct StepperHomed { int motor = 0; bool operator==(const StepperHomed&) const = default; };
struct StepperDisabled { int motor = 0; bool operator==(const StepperDisabled&) const = default; };
struct StepperLocked { int motor = 0; bool operator==(const StepperLocked&) const = default; };
struct SpeedAccelSet { int motor = 0; bool operator==(const SpeedAccelSet&) const = default; };
struct StepperStopped { int motor = 0; bool operator==(const StepperStopped&) const = default; };
struct ServoMoveDone {
  int servo = 0;
  int clamped = 0;  // 0 completed, 1 request was outside the servo range
  bool operator==(const ServoMoveDone&) const = default;
};
struct ServoHomed { int servo = 0; bool operator==(const ServoHomed&) const = default; };
struct AS5147Reading {
  int sensor = 0;
  std::int32_t angle = 0;
  bool operator==(const AS5147Reading&) const = default;
};
struct UltrasonicReading {
  int sensor = 0;
  std::int32_t distance_cm = 0;
  bool operator==(const UltrasonicReading&) const = default;
};
struct SensorsRemoved { int motor = 0; bool operator==(const SensorsRemoved&) const = default; };
struct Error { bool operator==(const Error&) const = default; };
struct Info {
  std::string text;
  bool operator==(const Info&) const = default;
};
}  // namespace rsp

using Response =
    std::variant<rsp::Alive, rsp::Version, rsp::SteppersCreated, rsp::ServosCreated,
                 rsp::AS5147sCreated, rsp::SensorsAttached, rsp::StepperMoveDone,
                 rsp::StepperHomed, rsp::StepperDisabled, rsp::StepperLocked, rsp::SpeedAccelSet,
                 rsp::StepperStopped, rsp::ServoMoveDone, rsp::ServoHomed, rsp::AS5147Reading,
                 rsp::UltrasonicReading, rsp::SensorsRemoved, rsp::Error, rsp::Info>;

enum class DecodeErrorKind {
  EmptyFrame,
  MissingTerminator,
  UnknownOpcode,
  ArityMismatch,
  NonNumericField,
  OutOfRange,
  InvalidValue,
};

std::string_view to_string(DecodeErrorKind kind);

struct DecodeError {
  DecodeErrorKind kind;
  std::size_t offset = 0;  // byte offset of the offending token within the frame
  bool operator==(const DecodeError&) const = default;
};

/// Either a decoded value or the reason decoding failed.
template <class T>
class Decoded {
 public:
  Decoded(T value) : state_(std::move(value)) {}
  Decoded(DecodeError error) : state_(error) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }
  const T& value() const& { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const DecodeError& error() const { return std::get<DecodeError>(state_); }

 private:
  std::variant<T, DecodeError> state_;
};

std::string encode_command(const Command& command);
Decoded<Command> decode_command(std::string_view frame);

std::string encode_response(const Response& response);
Decoded<Response> decode_response(std::string_view frame);

/// Splits an arbitrary byte stream into '#'-terminated frames.
class FrameDecoder {
 public:
  static constexpr std::size_t kDefaultMaxFrame = 512;

  struct FeedResult {
    std::vector<std::string> frames;
    std::size_t overflows = 0;  // frames discarded for exceeding max_frame
    // For each overflow, the number of frames completed before it.
    std::vector<std::size_t> overflow_positions;
  };

  explicit FrameDecoder(std::size_t max_frame = kDefaultMaxFrame) : max_frame_(max_frame) {}

  FeedResult feed(std::string_view chunk);

  std::size_t pending() const { return buffer_.size(); }
  std::size_t max_frame() const { return max_frame_; }
  void reset();

 private:
  std::size_t max_frame_;
  std::string buffer_;
  bool discarding_ = false;
};

}  // namespace jenny5::scufy
