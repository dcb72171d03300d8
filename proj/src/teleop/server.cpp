#include "jenny5/teleop/server.hpp"

#include "jenny5/teleop/session.hpp"

#include <boost/asio.hpp>
#include <boost/asio/ssl.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/ssl.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/beast/websocket/ssl.hpp>

#include <fstream>
#include <iostream>
#include <list>
#include <mutex>
#include <set>
#include <sstream>

#include <sys/socket.h>

namespace jenny5::teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace ssl = asio::ssl;
using tcp = asio::ip::tcp;
using nlohmann::json;

std::string_view mime_type(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

std::optional<std::filesystem::path> resolve_static(const std::filesystem::path& root, std::string_view target) {
  auto q = target.find_first_of("?#");
  if (q != std::string_view::npos) target = target.substr(0, q);
  if (target.empty() || target.front() != '/') return std::nullopt;
  std::filesystem::path rel(std::string(target.substr(1)));
  for (const auto& part : rel) {
    if (part == "..") return std::nullopt;
  }
  auto full = root / rel;
  std::error_code ec;
  if (std::filesystem::is_directory(full, ec)) full /= "index.html";
  if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

struct Server::Impl {
  Rig& rig;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::optional<ssl::context> tls;
  std::atomic<bool> stopping{false};
  std::thread accept_thread;

  std::mutex mutex;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;
  std::set<int> live_fds;

  // Joins sessions that already ended. Caller holds `mutex`.
  void reap() {
    for (auto it = workers.begin(); it != workers.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = workers.erase(it);
      } else {
        ++it;
      }
    }
  }

  Impl(Rig& r, ServerOptions o) : rig(r), options(std::move(o)) {}

  http::response<http::string_body> respond(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(false);
    auto target = std::string(req.target());
    auto reply = [&](http::status status, std::string_view type, std::string body) {
      res.result(status);
      res.set(http::field::content_type, std::string(type));
      res.body() = std::move(body);
      res.prepare_payload();
      return res;
    };
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return reply(http::status::method_not_allowed, "text/plain", "method not allowed\n");
    }
    if (target == "/healthz") return reply(http::status::ok, "application/json", R"({"status":"ok"})");
    if (target == "/state") {
      json snap = rig.last_snapshot();
      if (snap.is_null()) snap = rig.snapshot();
      return reply(http::status::ok, "application/json", snap.dump());
    }
    if (target == "/ws") return reply(http::status::upgrade_required, "text/plain", "websocket only\n");
    if (options.web_root) {
      if (auto file = resolve_static(*options.web_root, target)) {
        std::ifstream in(*file, std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        return reply(http::status::ok, mime_type(*file), body.str());
      }
    }
    return reply(http::status::not_found, "text/plain", "not found\n");
  }

  template <class Stream>
  void serve(Stream& stream) {
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(stream, buffer, req);
    if (websocket::is_upgrade(req)) {
      if (req.target() != "/ws") {
        auto res = respond(req);
        res.result(http::status::not_found);
        http::write(stream, res);
        return;
      }
      websocket::stream<Stream&> ws(stream);
      ws.accept(req);
      Session session(rig);
      beast::flat_buffer frame;
      for (;;) {
        frame.clear();
        ws.read(frame);
        std::vector<json> replies;
        if (!ws.got_text()) {
          replies.push_back(make_error("binary frames are not supported"));
        } else {
          replies = session.handle_text(beast::buffers_to_string(frame.data()));
        }
        ws.text(true);
        for (const auto& r : replies) ws.write(asio::buffer(r.dump()));
      }
    }
    http::write(stream, respond(req));
  }

  void handle(tcp::socket socket) {
    const int fd = socket.native_handle();
    {
      std::lock_guard lock(mutex);
      live_fds.insert(fd);
    }
    try {
      if (tls) {
        beast::ssl_stream<tcp::socket&> stream(socket, *tls);
        stream.handshake(ssl::stream_base::server);
        serve(stream);
      } else {
        serve(socket);
      }
    } catch (const std::exception&) {
      // peer went away or sent garbage; the session ends either way
    }
    {
      std::lock_guard lock(mutex);
      live_fds.erase(fd);
    }
    beast::error_code ec;
    socket.shutdown(tcp::socket::shutdown_both, ec);
    socket.close(ec);
  }
};

Server::Server(Rig& rig, ServerOptions options) : impl_(std::make_unique<Impl>(rig, std::move(options))) {
  auto& o = impl_->options;
  if (o.tls_cert.has_value() != o.tls_key.has_value()) {
    throw std::invalid_argument("TLS needs both a certificate and a key");
  }
  if (o.tls_cert) {
    impl_->tls.emplace(ssl::context::tls_server);
    impl_->tls->use_certificate_chain_file(o.tls_cert->string());
    impl_->tls->use_private_key_file(o.tls_key->string(), ssl::context::pem);
  }
}

Server::~Server() { stop(); }

bool Server::tls() const { return impl_->tls.has_value(); }

void Server::start() {
  auto& im = *impl_;
  tcp::endpoint ep(asio::ip::make_address(im.options.bind_address), im.options.port);
  im.acceptor.open(ep.protocol());
  im.acceptor.set_option(asio::socket_base::reuse_address(true));
  im.acceptor.bind(ep);
  im.acceptor.listen();
  im.acceptor.non_blocking(true);
  port_ = im.acceptor.local_endpoint().port();
  im.accept_thread = std::thread([this] {
    auto& im = *impl_;
    while (!im.stopping) {
      tcp::socket socket(im.io);
      beast::error_code ec;
      im.acceptor.accept(socket, ec);
      if (ec == asio::error::would_block || ec == asio::error::try_again) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      if (ec) continue;
      socket.non_blocking(false, ec);
      socket.set_option(tcp::no_delay(true), ec);
      ++sessions_served_;
      std::lock_guard lock(im.mutex);
      im.reap();
      auto done = std::make_shared<std::atomic<bool>>(false);
      im.workers.push_back({std::thread([&im, done, s = std::move(socket)]() mutable {
                              im.handle(std::move(s));
                              done->store(true);
                            }),
                            done});
    }
  });
}

void Server::stop() {
  auto& im = *impl_;
  if (im.stopping.exchange(true)) return;
  if (im.accept_thread.joinable()) im.accept_thread.join();
  beast::error_code ec;
  im.acceptor.close(ec);
  std::list<Impl::Worker> workers;
  {
    std::lock_guard lock(im.mutex);
    for (int fd : im.live_fds) ::shutdown(fd, SHUT_RDWR);
    workers.swap(im.workers);
  }
  for (auto& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

}  // namespace jenny5::teleop
