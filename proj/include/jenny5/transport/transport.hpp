#pragma once

// Byte-stream transports shared by the Scufy and RoboClaw clients.

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace jenny5::transport {

class TransportClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConnectFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteTransport {
 public:
  virtual ~ByteTransport() = default;

  /// Writes all bytes. Throws TransportClosed if the peer is gone.
  virtual void write(std::string_view bytes) = 0;
  /// Non-blocking. Returns 0 when nothing is pending; throws TransportClosed on EOF.
  virtual std::size_t read_some(std::span<char> buffer) = 0;
  virtual bool is_open() const = 0;
  virtual void close() = 0;

  /// Drains everything currently available.
  std::string read_available();
};

/// Two connected in-memory endpoints; bytes written to one are read from the other.
std::pair<std::unique_ptr<ByteTransport>, std::unique_ptr<ByteTransport>> make_pipe_pair();

std::unique_ptr<ByteTransport> connect_tcp(const std::string& host, std::uint16_t port,
                                           std::chrono::milliseconds timeout = std::chrono::seconds(2));
std::unique_ptr<ByteTransport> open_serial(const std::string& device, unsigned baud);

struct Endpoint {
  enum class Kind { Tcp, Serial } kind = Kind::Tcp;
  std::string host_or_device;
  std::uint16_t port = 0;
  unsigned baud = 115200;
};

/// Accepts "tcp://host:port", "host:port", "serial:///dev/ttyACM0?baud=115200"
/// and bare device paths such as "/dev/ttyUSB0".
Endpoint parse_endpoint(std::string_view text, unsigned default_baud = 115200);
std::unique_ptr<ByteTransport> open_endpoint(std::string_view text, unsigned default_baud = 115200);

}  // namespace jenny5::transport
