#pragma once

// HTTP + WebSocket front end.
//
//   GET /ws       WebSocket upgrade, JSON text frames (see Session)
//   GET /healthz  {"status":"ok"}
//   GET /state    latest snapshot
//   GET /...      static files under web_root, 404 without one

#include "jenny5/teleop/rig.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

namespace jenny5::teleop {

struct ServerOptions {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 8443;  // 0 picks an ephemeral port
  std::optional<std::filesystem::path> tls_cert;
  std::optional<std::filesystem::path> tls_key;
  std::optional<std::filesystem::path> web_root;
};

class Server {
 public:
  Server(Rig& rig, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting on a background thread.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  bool tls() const;
  std::size_t sessions_served() const { return sessions_served_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  std::atomic<std::size_t> sessions_served_{0};
};

/// Content type for a static file, by extension.
std::string_view mime_type(const std::filesystem::path& path);
/// Maps a request target onto a file under `root`; nullopt for targets that
/// escape the root or name nothing.
std::optional<std::filesystem::path> resolve_static(const std::filesystem::path& root, std::string_view target);

}  // namespace jenny5::teleop
