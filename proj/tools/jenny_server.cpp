// Teleoperation server: WebSocket on /ws, health and state over plain HTTP.

#include "jenny5/teleop/server.hpp"
#include "wait_for_signal.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Jenny 5 teleoperation server"};
  std::string config_path;
  jenny5::teleop::ServerOptions options;
  std::string tls_cert, tls_key, web_root;
  app.add_option("--config", config_path, "Rig configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--port", options.port, "Listen port")->capture_default_str();
  app.add_option("--bind", options.bind_address, "Listen address")->capture_default_str();
  auto* cert = app.add_option("--tls-cert", tls_cert, "PEM certificate chain")->check(CLI::ExistingFile);
  auto* key = app.add_option("--tls-key", tls_key, "PEM private key")->check(CLI::ExistingFile);
  cert->needs(key);
  key->needs(cert);
  app.add_option("--web-root", web_root, "Directory served at /")->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  if (!tls_cert.empty()) {
    options.tls_cert = tls_cert;
    options.tls_key = tls_key;
  }
  if (!web_root.empty()) options.web_root = web_root;

  try {
    jenny5::teleop::Rig rig(jenny5::teleop::load_rig_config(config_path));
    for (const auto& error : rig.connect_all()) std::cerr << "warning: " << error << "\n";
    rig.start_maintenance();
    jenny5::teleop::Server server(rig, options);
    server.start();
    std::cout << "jenny-server listening on " << (server.tls() ? "wss" : "ws") << "://" << options.bind_address
              << ":" << server.port() << "/ws" << std::endl;
    tools::wait_for_signal();
    server.stop();
    rig.stop();
  } catch (const std::exception& e) {
    std::cerr << "jenny-server: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
