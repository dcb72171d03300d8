// Simulated Scufy board served over TCP, one client at a time.

#include "jenny5/sim/board_config.hpp"
#include "wait_for_signal.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Simulated Scufy board"};
  std::string config_path;
  std::uint16_t port = 7501;
  double speed = 1.0;
  double dt = 0.005;
  std::string bind = "127.0.0.1";
  app.add_option("--config", config_path, "Board configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--port", port, "TCP port")->capture_default_str();
  app.add_option("--speed", speed, "Simulated seconds per wall-clock second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--dt", dt, "Simulated seconds per tick")->check(CLI::Range(1e-4, 0.1))->capture_default_str();
  app.add_option("--bind", bind, "Listen address")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    jenny5::sim::BoardConfig config;
    if (!config_path.empty()) config = jenny5::sim::load_board_config(config_path);
    auto device = std::make_shared<jenny5::sim::ScufyDevice>(config);
    jenny5::transport::DeviceServer server(device, {port, dt, speed, bind});
    std::cout << "scufy-sim listening on " << bind << ":" << server.port() << " (firmware "
              << config.firmware_version << ", speed x" << speed << ")" << std::endl;
    tools::wait_for_signal();
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "scufy-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
