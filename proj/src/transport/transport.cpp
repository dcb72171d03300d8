#include "jenny5/transport/transport.hpp"

#include <boost/asio.hpp>

#include <array>
#include <charconv>
#include <mutex>

#include <poll.h>
#include <unistd.h>

namespace asio = boost::asio;

namespace jenny5::transport {

std::string ByteTransport::read_available() {
  std::string out;
  std::array<char, 1024> buf{};
  for (;;) {
    std::size_t n = read_some(buf);
    if (n == 0) break;
    out.append(buf.data(), n);
  }
  return out;
}

namespace {

// ------------------------------------------------------------------ pipes

struct PipeState {
  std::mutex mutex;
  std::string to_b;  // written by a, read by b
  std::string to_a;
  bool closed = false;
};

class PipeEnd final : public ByteTransport {
 public:
  PipeEnd(std::shared_ptr<PipeState> state, bool is_a) : state_(std::move(state)), is_a_(is_a) {}
  ~PipeEnd() override { close(); }

  void write(std::string_view bytes) override {
    std::lock_guard lock(state_->mutex);
    if (state_->closed) throw TransportClosed("pipe closed");
    (is_a_ ? state_->to_b : state_->to_a).append(bytes);
  }

  std::size_t read_some(std::span<char> buffer) override {
    std::lock_guard lock(state_->mutex);
    std::string& inbox = is_a_ ? state_->to_a : state_->to_b;
    if (inbox.empty()) {
      if (state_->closed) throw TransportClosed("pipe closed");
      return 0;
    }
    std::size_t n = std::min(buffer.size(), inbox.size());
    std::copy_n(inbox.begin(), n, buffer.begin());
    inbox.erase(0, n);
    return n;
  }

  bool is_open() const override {
    std::lock_guard lock(state_->mutex);
    return !state_->closed;
  }

  void close() override {
    std::lock_guard lock(state_->mutex);
    state_->closed = true;
  }

 private:
  std::shared_ptr<PipeState> state_;
  bool is_a_;
};

// ---------------------------------------------------------------- fd based

// Returns true if fd has data or hung up.
bool readable(int fd) {
  pollfd p{fd, POLLIN, 0};
  return ::poll(&p, 1, 0) > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR)) != 0;
}

class TcpTransport final : public ByteTransport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
      : socket_(io_) {
    boost::system::error_code ec;
    asio::ip::tcp::resolver resolver(io_);
    auto endpoints = resolver.resolve(host, std::to_string(port), ec);
    if (ec) throw ConnectFailed("resolve " + host + ": " + ec.message());
    boost::system::error_code connect_ec = asio::error::would_block;
    asio::async_connect(socket_, endpoints,
                        [&](const boost::system::error_code& e, const auto&) { connect_ec = e; });
    io_.run_for(timeout);
    if (connect_ec == asio::error::would_block) {
      socket_.close(ec);
      throw ConnectFailed("connect " + host + ":" + std::to_string(port) + ": timed out");
    }
    if (connect_ec) {
      throw ConnectFailed("connect " + host + ":" + std::to_string(port) + ": " +
                          connect_ec.message());
    }
    socket_.set_option(asio::ip::tcp::no_delay(true), ec);
  }

  ~TcpTransport() override { close(); }

  void write(std::string_view bytes) override {
    if (!socket_.is_open()) throw TransportClosed("tcp socket closed");
    boost::system::error_code ec;
    asio::write(socket_, asio::buffer(bytes.data(), bytes.size()), ec);
    if (ec) {
      close();
      throw TransportClosed("tcp write: " + ec.message());
    }
  }

  std::size_t read_some(std::span<char> buffer) override {
    if (!socket_.is_open()) throw TransportClosed("tcp socket closed");
    if (!readable(socket_.native_handle())) return 0;
    boost::system::error_code ec;
    std::size_t n = socket_.read_some(asio::buffer(buffer.data(), buffer.size()), ec);
    if (ec) {
      close();
      throw TransportClosed("tcp read: " + ec.message());
    }
    return n;
  }

  bool is_open() const override { return socket_.is_open(); }

  void close() override {
    boost::system::error_code ec;
    if (socket_.is_open()) {
      socket_.shutdown(asio::ip::tcp::socket::shutdown_both, ec);
      socket_.close(ec);
    }
  }

 private:
  asio::io_context io_;
  asio::ip::tcp::socket socket_;
};

class SerialTransport final : public ByteTransport {
 public:
  SerialTransport(const std::string& device, unsigned baud) : port_(io_) {
    boost::system::error_code ec;
    port_.open(device, ec);
    if (ec) throw ConnectFailed("open " + device + ": " + ec.message());
    port_.set_option(asio::serial_port::baud_rate(baud), ec);
    if (ec) throw ConnectFailed("baud " + std::to_string(baud) + ": " + ec.message());
    port_.set_option(asio::serial_port::character_size(8), ec);
    port_.set_option(asio::serial_port::parity(asio::serial_port::parity::none), ec);
    port_.set_option(asio::serial_port::stop_bits(asio::serial_port::stop_bits::one), ec);
    port_.set_option(asio::serial_port::flow_control(asio::serial_port::flow_control::none), ec);
  }

  ~SerialTransport() override { close(); }

  void write(std::string_view bytes) override {
    if (!port_.is_open()) throw TransportClosed("serial port closed");
    boost::system::error_code ec;
    asio::write(port_, asio::buffer(bytes.data(), bytes.size()), ec);
    if (ec) throw TransportClosed("serial write: " + ec.message());
  }

  std::size_t read_some(std::span<char> buffer) override {
    if (!port_.is_open()) throw TransportClosed("serial port closed");
    if (!readable(port_.native_handle())) return 0;
    ssize_t n = ::read(port_.native_handle(), buffer.data(), buffer.size());
    if (n <= 0) {
      close();
      throw TransportClosed("serial read failed");
    }
    return static_cast<std::size_t>(n);
  }

  bool is_open() const override { return port_.is_open(); }

  void close() override {
    boost::system::error_code ec;
    port_.close(ec);
  }

 private:
  asio::io_context io_;
  asio::serial_port port_;
};

unsigned parse_unsigned(std::string_view text, std::string_view whole) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad endpoint: " + std::string(whole));
  }
  return value;
}

}  // namespace

std::pair<std::unique_ptr<ByteTransport>, std::unique_ptr<ByteTransport>> make_pipe_pair() {
  auto state = std::make_shared<PipeState>();
  return {std::make_unique<PipeEnd>(state, true), std::make_unique<PipeEnd>(state, false)};
}

std::unique_ptr<ByteTransport> connect_tcp(const std::string& host, std::uint16_t port,
                                           std::chrono::milliseconds timeout) {
  return std::make_unique<TcpTransport>(host, port, timeout);
}

std::unique_ptr<ByteTransport> open_serial(const std::string& device, unsigned baud) {
  return std::make_unique<SerialTransport>(device, baud);
}

Endpoint parse_endpoint(std::string_view text, unsigned default_baud) {
  const std::string_view whole = text;
  Endpoint ep;
  ep.baud = default_baud;
  auto strip = [&](std::string_view prefix) {
    if (text.substr(0, prefix.size()) == prefix) {
      text.remove_prefix(prefix.size());
      return true;
    }
    return false;
  };
  if (strip("serial://") || text.substr(0, 1) == "/") {
    ep.kind = Endpoint::Kind::Serial;
    auto q = text.find("?baud=");
    if (q != std::string_view::npos) {
      ep.baud = parse_unsigned(text.substr(q + 6), whole);
      text = text.substr(0, q);
    }
    if (text.empty()) throw std::invalid_argument("bad endpoint: " + std::string(whole));
    ep.host_or_device = std::string(text);
    return ep;
  }
  strip("tcp://");
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw std::invalid_argument("bad endpoint: " + std::string(whole));
  }
  ep.kind = Endpoint::Kind::Tcp;
  ep.host_or_device = std::string(text.substr(0, colon));
  unsigned port = parse_unsigned(text.substr(colon + 1), whole);
  if (port == 0 || port > 65535) throw std::invalid_argument("bad port: " + std::string(whole));
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

std::unique_ptr<ByteTransport> open_endpoint(std::string_view text, unsigned default_baud) {
  Endpoint ep = parse_endpoint(text, default_baud);
  if (ep.kind == Endpoint::Kind::Serial) return open_serial(ep.host_or_device, ep.baud);
  return connect_tcp(ep.host_or_device, ep.port);
}

}  // namespace jenny5::transport
