#include "sim_rig.hpp"

#include <boost/asio.hpp>

#include <fstream>

namespace jenny5::testing {

using teleop::Group;

std::filesystem::path source_dir() { return JENNY5_SOURCE_DIR; }

std::filesystem::path config_path(std::string_view name) { return source_dir() / "configs" / name; }

std::uint16_t closed_port() {
  namespace asio = boost::asio;
  asio::io_context io;
  asio::ip::tcp::acceptor a(io, {asio::ip::make_address("127.0.0.1"), 0});
  auto port = a.local_endpoint().port();
  a.close();
  return port;
}

SimRig::SimRig(double speed, std::set<Group> skip) {
  config = teleop::load_rig_config(config_path("rig.json"));
  auto endpoint = [](std::uint16_t port) { return "tcp://127.0.0.1:" + std::to_string(port); };
  transport::DeviceServer::Options options{0, 0.005, speed, "127.0.0.1"};

  for (auto& [group, cfg] : config.scufy) {
    if (skip.contains(group)) {
      cfg.endpoint = endpoint(closed_port());
      continue;
    }
    auto board = sim::load_board_config(config_path(std::string(teleop::to_string(group)) + ".json"));
    auto device = std::make_shared<sim::ScufyDevice>(board);
    auto server = std::make_unique<transport::DeviceServer>(device, options);
    cfg.endpoint = endpoint(server->port());
    scufy[group] = device;
    servers[group] = std::move(server);
  }
  for (auto& [group, cfg] : config.duty) {
    if (skip.contains(group)) {
      cfg.endpoint = endpoint(closed_port());
      continue;
    }
    auto board = roboclaw::load_board_config(config_path(std::string(teleop::to_string(group)) + ".json"));
    auto device = std::make_shared<roboclaw::Emulator>(board);
    auto server = std::make_unique<transport::DeviceServer>(device, options);
    cfg.endpoint = endpoint(server->port());
    roboclaw[group] = device;
    servers[group] = std::move(server);
  }
}

SimRig::~SimRig() {
  for (auto& [group, server] : servers) server->stop();
}

void SimRig::kill(Group group) { servers.at(group)->stop(); }

}  // namespace jenny5::testing
