#pragma once

// A full set of simulated boards on ephemeral ports plus a RigConfig
// pointing at them. Built from the shipped configs/ directory.

#include "jenny5/roboclaw/emulator.hpp"
#include "jenny5/sim/board_config.hpp"
#include "jenny5/teleop/rig.hpp"
#include "jenny5/transport/device_server.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>

namespace jenny5::testing {

std::filesystem::path source_dir();
std::filesystem::path config_path(std::string_view name);

struct SimRig {
  /// `speed` is passed to every DeviceServer; groups in `skip` get no server
  /// and their endpoint points at a closed port.
  explicit SimRig(double speed = 1.0, std::set<teleop::Group> skip = {});
  ~SimRig();

  teleop::RigConfig config;
  std::map<teleop::Group, std::shared_ptr<sim::ScufyDevice>> scufy;
  std::map<teleop::Group, std::shared_ptr<roboclaw::Emulator>> roboclaw;
  std::map<teleop::Group, std::unique_ptr<transport::DeviceServer>> servers;

  /// Stops the server for one board; the client sees its connection drop.
  void kill(teleop::Group group);

  template <class Fn>
  decltype(auto) with_scufy(teleop::Group group, Fn&& fn) {
    auto device = scufy.at(group);
    return servers.at(group)->with_device([&](transport::TickedDevice&) { return fn(device->board()); });
  }
  template <class Fn>
  decltype(auto) with_roboclaw(teleop::Group group, Fn&& fn) {
    auto device = roboclaw.at(group);
    return servers.at(group)->with_device([&](transport::TickedDevice&) { return fn(*device); });
  }
};

/// A TCP port nothing listens on.
std::uint16_t closed_port();

}  // namespace jenny5::testing
