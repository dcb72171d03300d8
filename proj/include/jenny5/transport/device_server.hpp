#pragma once

// Hosting for simulated boards: a device consumes request bytes and produces
// reply bytes, and is advanced by a fixed simulated time step.

#include "jenny5/transport/transport.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

namespace jenny5::transport {

class TickedDevice {
 public:
  virtual ~TickedDevice() = default;
  /// Bytes from the host. Returns any bytes to send back immediately.
  virtual std::string on_bytes(std::string_view bytes) = 0;
  /// Advances simulated time. Returns bytes emitted during the step.
  virtual std::string tick(double dt) = 0;
  /// The host went away; discard any partial input.
  virtual void on_disconnect() {}
};

/// In-process transport wired straight into a device; time only moves when
/// advance() is called, which makes tests deterministic.
class LoopbackTransport final : public ByteTransport {
 public:
  explicit LoopbackTransport(std::shared_ptr<TickedDevice> device);

  void write(std::string_view bytes) override;
  std::size_t read_some(std::span<char> buffer) override;
  bool is_open() const override;
  void close() override;

  /// Ticks the device once and queues whatever it emitted.
  void advance(double dt);
  TickedDevice& device() { return *device_; }

 private:
  std::shared_ptr<TickedDevice> device_;
  mutable std::mutex mutex_;
  std::string rx_;
  bool open_ = true;
};

/// TCP listener serving one client at a time, ticking the device on its own thread.
class DeviceServer {
 public:
  struct Options {
    std::uint16_t port = 0;  // 0 picks an ephemeral port
    double dt = 0.005;       // simulated seconds per tick
    double speed = 1.0;      // simulated seconds per wall-clock second
    std::string bind_address = "127.0.0.1";
  };

  DeviceServer(std::shared_ptr<TickedDevice> device, Options options);
  ~DeviceServer();
  DeviceServer(const DeviceServer&) = delete;
  DeviceServer& operator=(const DeviceServer&) = delete;

  std::uint16_t port() const { return port_; }
  bool client_connected() const { return connected_.load(); }
  void stop();

  /// Runs `fn(device)` between ticks.
  template <class Fn>
  decltype(auto) with_device(Fn&& fn) {
    std::lock_guard lock(mutex_);
    return fn(*device_);
  }

 private:
  void run();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::shared_ptr<TickedDevice> device_;
  Options options_;
  std::uint16_t port_ = 0;
  std::mutex mutex_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> connected_{false};
  std::thread thread_;
};

}  // namespace jenny5::transport
