#pragma once

// The robot as seen by the teleop server: three Scufy boards (arms, head) and
// two RoboClaw boards (platform, leg). Each subsystem has its own lock, so a
// slow or dead board never stalls the others.

#include "jenny5/host/scufy_client.hpp"
#include "jenny5/roboclaw/client.hpp"
#include "jenny5/teleop/behaviors.hpp"
#include "jenny5/teleop/messages.hpp"
#include "jenny5/teleop/tilt.hpp"

#include <json.hpp>

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace jenny5::teleop {

using Clock = std::chrono::steady_clock;
using ClockFn = std::function<Clock::time_point()>;

struct JointConfig {
  int motor = 0;
  std::optional<int> sensor;  // AS5147 index
  std::int32_t end1 = 0;
  std::int32_t end2 = 0;
  std::int32_t home = 0;
  int direction = 1;
  double steps_per_degree = 10;
};

struct ScufySubsystemConfig {
  std::string endpoint;
  std::vector<scufy::PinTriple> motors;
  std::vector<int> as5147_pins;
  std::vector<JointConfig> joints;
  std::uint32_t speed = 1000;
  std::uint32_t acceleration = 1000;
  double counts_per_rev = 360;

  const JointConfig* joint(int motor) const;
};

struct DutySubsystemConfig {
  std::string endpoint;
  std::uint8_t address = roboclaw::kDefaultAddress;
  double duty_per_degree = 500;
  double turn_per_degree = 300;
  std::uint32_t acceleration = 20000;
  int pulse_duty = 8000;
  std::chrono::milliseconds pulse{500};
  double min_height_cm = 35;
  double max_height_cm = 95;
};

struct RigConfig {
  std::map<Group, ScufySubsystemConfig> scufy;
  std::map<Group, DutySubsystemConfig> duty;
  BehaviorConfig behaviors;
  std::chrono::milliseconds rate_limit{100};
  std::chrono::milliseconds reply_timeout{250};
  std::chrono::milliseconds init_timeout{3000};
  std::chrono::milliseconds reconnect_interval{2000};
};

RigConfig rig_config_from_json(const nlohmann::json& document);
RigConfig load_rig_config(const std::filesystem::path& path);

/// Outcome of a rig operation: an error naming the subsystem, or success,
/// possibly deferred by the rate limiter.
struct Outcome {
  std::optional<std::string> error;
  bool deferred = false;
  explicit operator bool() const { return !error; }
  static Outcome fail(std::string text) { return {std::move(text), false}; }
};

class Rig {
 public:
  explicit Rig(RigConfig config, ClockFn clock = [] { return Clock::now(); });
  ~Rig();
  Rig(const Rig&) = delete;
  Rig& operator=(const Rig&) = delete;

  /// Connects every configured subsystem. Returns one message per failure;
  /// failed subsystems stay offline and are retried by maintenance.
  std::vector<std::string> connect_all();
  /// Background thread running maintenance() every `period`.
  void start_maintenance(std::chrono::milliseconds period = std::chrono::milliseconds(10));
  void stop();

  /// Drains board replies, sends rate-limited commands whose slot opened,
  /// ends expired pulses and retries dead subsystems.
  void maintenance();

  const RigConfig& config() const { return config_; }
  bool online(Group group) const;
  std::optional<std::string> subsystem_error(Group group) const;

  /// Relative move, at most one per motor per rate-limit window. A command
  /// arriving inside the window replaces any queued one for that motor.
  Outcome move_steps(Group group, int motor, std::int32_t steps);
  /// Both channels of a RoboClaw group, rate limited like move_steps.
  Outcome drive_duty(Group group, DutyPair duty);
  /// SH to every motor of a Scufy group.
  Outcome home(Group group);
  /// Fixed-duty platform pulse in the given direction (+1 / -1).
  Outcome pulse(Group group, int direction);
  /// ST to every Scufy motor with a command in flight, zero duty to every RoboClaw channel.
  Outcome stop_all();

  nlohmann::json snapshot();
  nlohmann::json last_snapshot() const;

  /// Motion frames actually written for a motor since start, for diagnostics.
  std::size_t commands_sent(Group group, int motor) const;

 private:
  struct ScufySub;
  struct DutySub;

  ScufySub* scufy_sub(Group group) const;
  DutySub* duty_sub(Group group) const;
  void connect_scufy(ScufySub& sub);
  void connect_duty(DutySub& sub);
  void send_move(ScufySub& sub, int motor, std::int32_t steps);
  bool send_duty(DutySub& sub, DutyPair duty, std::uint32_t acceleration);
  void mark_dead(ScufySub& sub, const std::string& why);
  void mark_dead(DutySub& sub, const std::string& why);

  RigConfig config_;
  ClockFn clock_;
  std::map<Group, std::unique_ptr<ScufySub>> scufy_;
  std::map<Group, std::unique_ptr<DutySub>> duty_;

  mutable std::mutex snapshot_mutex_;
  nlohmann::json last_snapshot_;

  std::mutex thread_mutex_;
  std::condition_variable thread_cv_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace jenny5::teleop
