#pragma once

#include "jenny5/roboclaw/packet.hpp"
#include "jenny5/transport/device_server.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace jenny5::roboclaw {

struct ActuatorConfig {
  double full_travel_s = 7.0;
  double min_height_cm = 35.0;
  double max_height_cm = 95.0;
  double initial_fraction = 0.0;
};

struct BoardConfig {
  std::string name = "platform";
  std::uint8_t address = kDefaultAddress;
  std::string firmware = "USB Roboclaw 2x15a v4.1.34\n";
  double temperature_c = 30.0;
  double battery_v = 16.8;
  double rated_current_a = 15.0;
  // Current drawn by each channel at full duty.
  std::array<double, 2> load_a{4.0, 4.0};
  // Channels driving a linear actuator (the leg); absent for wheels.
  std::optional<ActuatorConfig> actuator;
};

BoardConfig platform_board();
BoardConfig leg_board();
/// "platform" or "leg".
std::optional<BoardConfig> builtin_board(std::string_view name);
/// Starts from `base` (or a preset named by "preset") and overrides listed keys.
BoardConfig board_config_from_json(const nlohmann::json& document);
BoardConfig load_board_config(const std::filesystem::path& path);

/// Behavioural model of a dual-channel board, advanced in simulated time.
class Emulator final : public transport::TickedDevice {
 public:
  enum class Mode { Speed, Duty };

  struct Channel {
    Mode mode = Mode::Duty;
    int target_duty = 0;
    std::uint32_t acceleration = 0;
    double pwm = 0;
    std::uint32_t max_current_raw = 0;
    double actuator_fraction = 0;

    int pwm_raw() const;
  };

  explicit Emulator(BoardConfig config = platform_board());

  std::string on_bytes(std::string_view bytes) override;
  std::string tick(double dt) override;
  void on_disconnect() override { parser_.reset(); }

  /// Handles one request; nullopt when the packet gets no reply.
  std::optional<Packet> handle(const Packet& request);
  void advance(double dt);

  const Channel& channel(int index) const { return channels_.at(static_cast<std::size_t>(index)); }
  Channel& channel(int index) { return channels_.at(static_cast<std::size_t>(index)); }
  const BoardConfig& config() const { return config_; }
  BoardConfig& config() { return config_; }
  double now() const { return time_; }

  std::uint32_t current_raw(int index) const;
  std::optional<double> actuator_height_cm(int index) const;
  std::size_t crc_failures() const { return crc_failures_; }

 private:
  BoardConfig config_;
  std::array<Channel, 2> channels_;
  RequestParser parser_;
  double time_ = 0;
  std::size_t crc_failures_ = 0;
};

}  // namespace jenny5::roboclaw
