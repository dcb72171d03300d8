#pragma once

#include "jenny5/sim/virtual_board.hpp"
#include "jenny5/transport/device_server.hpp"

#include <json.hpp>

#include <filesystem>

namespace jenny5::sim {

/// Parses a board configuration document. Bindings name either an explicit
/// "units_per_step" or a "drivetrain" preset (built-in or from the document's
/// "drivetrains" table), converted with the document's counts_per_rev.
BoardConfig board_config_from_json(const nlohmann::json& document);
BoardConfig load_board_config(const std::filesystem::path& path);

/// "A0" -> {AS5147, 0}, "P2" -> {Potentiometer, 2}.
SensorRef parse_sensor_ref(std::string_view text);

/// Adapts a VirtualBoard to the byte-stream device interface.
class ScufyDevice final : public transport::TickedDevice {
 public:
  explicit ScufyDevice(BoardConfig config) : board_(std::move(config)) {}

  std::string on_bytes(std::string_view bytes) override;
  std::string tick(double dt) override;
  void on_disconnect() override { decoder_.reset(); }

  VirtualBoard& board() { return board_; }
  const VirtualBoard& board() const { return board_; }

 private:
  VirtualBoard board_;
  scufy::FrameDecoder decoder_;
};

}  // namespace jenny5::sim
