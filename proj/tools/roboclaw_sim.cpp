// Emulated RoboClaw board served over TCP.

#include "jenny5/roboclaw/emulator.hpp"
#include "wait_for_signal.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Emulated RoboClaw board"};
  std::string board = "platform";
  std::string config_path;
  std::uint16_t port = 7502;
  double speed = 1.0;
  double dt = 0.005;
  std::string bind = "127.0.0.1";
  app.add_option("--board", board, "Preset: platform or leg")
      ->check(CLI::IsMember({"platform", "leg"}))
      ->capture_default_str();
  app.add_option("--config", config_path, "Board configuration (JSON), overrides --board")
      ->check(CLI::ExistingFile);
  app.add_option("--port", port, "TCP port")->capture_default_str();
  app.add_option("--speed", speed, "Simulated seconds per wall-clock second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--dt", dt, "Simulated seconds per tick")->check(CLI::Range(1e-4, 0.1))->capture_default_str();
  app.add_option("--bind", bind, "Listen address")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = config_path.empty() ? *jenny5::roboclaw::builtin_board(board)
                                      : jenny5::roboclaw::load_board_config(config_path);
    auto device = std::make_shared<jenny5::roboclaw::Emulator>(config);
    jenny5::transport::DeviceServer server(device, {port, dt, speed, bind});
    std::cout << "roboclaw-sim (" << config.name << ", address 0x" << std::hex << int(config.address) << std::dec
              << ") listening on " << bind << ":" << server.port() << std::endl;
    tools::wait_for_signal();
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "roboclaw-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
