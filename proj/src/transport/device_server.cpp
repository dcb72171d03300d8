#include "jenny5/transport/device_server.hpp"

#include <boost/asio.hpp>

#include <array>
#include <chrono>
#include <optional>

#include <poll.h>

namespace asio = boost::asio;

namespace jenny5::transport {

LoopbackTransport::LoopbackTransport(std::shared_ptr<TickedDevice> device)
    : device_(std::move(device)) {}

void LoopbackTransport::write(std::string_view bytes) {
  std::lock_guard lock(mutex_);
  if (!open_) throw TransportClosed("loopback closed");
  rx_ += device_->on_bytes(bytes);
}

std::size_t LoopbackTransport::read_some(std::span<char> buffer) {
  std::lock_guard lock(mutex_);
  if (rx_.empty()) {
    if (!open_) throw TransportClosed("loopback closed");
    return 0;
  }
  std::size_t n = std::min(buffer.size(), rx_.size());
  std::copy_n(rx_.begin(), n, buffer.begin());
  rx_.erase(0, n);
  return n;
}

bool LoopbackTransport::is_open() const {
  std::lock_guard lock(mutex_);
  return open_;
}

void LoopbackTransport::close() {
  std::lock_guard lock(mutex_);
  open_ = false;
}

void LoopbackTransport::advance(double dt) {
  std::lock_guard lock(mutex_);
  if (open_) rx_ += device_->tick(dt);
}

struct DeviceServer::Impl {
  asio::io_context io;
  asio::ip::tcp::acceptor acceptor{io};
  std::optional<asio::ip::tcp::socket> client;
};

DeviceServer::DeviceServer(std::shared_ptr<TickedDevice> device, Options options)
    : impl_(std::make_unique<Impl>()), device_(std::move(device)), options_(options) {
  if (options_.dt <= 0 || options_.speed <= 0) throw std::invalid_argument("dt and speed must be > 0");
  asio::ip::tcp::endpoint ep(asio::ip::make_address(options_.bind_address), options_.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->acceptor.non_blocking(true);
  port_ = impl_->acceptor.local_endpoint().port();
  thread_ = std::thread([this] { run(); });
}

DeviceServer::~DeviceServer() { stop(); }

void DeviceServer::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
  boost::system::error_code ec;
  if (impl_->client) impl_->client->close(ec);
  impl_->client.reset();
  impl_->acceptor.close(ec);
  connected_ = false;
}

void DeviceServer::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(options_.dt / options_.speed));
  auto next = clock::now();
  std::array<char, 4096> buf{};

  auto drop_client = [this] {
    boost::system::error_code ec;
    impl_->client->close(ec);
    impl_->client.reset();
    connected_ = false;
    std::lock_guard lock(mutex_);
    device_->on_disconnect();
  };

  while (!stopping_) {
    if (!impl_->client) {
      boost::system::error_code ec;
      asio::ip::tcp::socket s(impl_->io);
      impl_->acceptor.accept(s, ec);
      if (!ec) {
        s.set_option(asio::ip::tcp::no_delay(true), ec);
        impl_->client.emplace(std::move(s));
        connected_ = true;
      }
    }
    std::string inbound;
    bool failed_write = false;
    while (impl_->client) {
      pollfd p{impl_->client->native_handle(), POLLIN, 0};
      if (::poll(&p, 1, 0) <= 0) break;
      boost::system::error_code ec;
      std::size_t n = impl_->client->read_some(asio::buffer(buf), ec);
      if (ec) {
        drop_client();
        break;
      }
      inbound.append(buf.data(), n);
    }
    {
      std::lock_guard lock(mutex_);
      std::string reply;
      if (!inbound.empty()) reply = device_->on_bytes(inbound);
      reply += device_->tick(options_.dt);
      if (!reply.empty() && impl_->client) {
        boost::system::error_code ec;
        asio::write(*impl_->client, asio::buffer(reply), ec);
        if (ec) failed_write = true;
      }
    }
    if (failed_write) drop_client();
    next += period;
    auto now = clock::now();
    if (next > now) {
      std::this_thread::sleep_until(next);
    } else if (now - next > std::chrono::milliseconds(100)) {
      next = now;  // fell far behind; do not try to catch up
    }
  }
}

}  // namespace jenny5::transport
