#include "jenny5/teleop/server.hpp"
#include "sim_rig.hpp"
#include "ws_client.hpp"

#include <doctest.h>

#include <fstream>

using namespace jenny5;
using namespace jenny5::teleop;
using jenny5::testing::SimRig;
using jenny5::testing::WsClient;
using jenny5::testing::http_get;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("jenny5-web-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    std::filesystem::create_directories(path / "js");
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  void write(const std::string& rel, const std::string& body) const { std::ofstream(path / rel) << body; }
};

}  // namespace

TEST_CASE("mime types and static path resolution") {
  CHECK(mime_type("a/index.html") == "text/html; charset=utf-8");
  CHECK(mime_type("x.js") == "text/javascript");
  CHECK(mime_type("x.bin") == "application/octet-stream");

  TempDir web;
  web.write("index.html", "<p>hi</p>");
  web.write("js/app.js", "1");
  CHECK(resolve_static(web.path, "/") == web.path / "index.html");
  CHECK(resolve_static(web.path, "/js/app.js?v=2") == web.path / "js/app.js");
  CHECK_FALSE(resolve_static(web.path, "/../etc/passwd").has_value());
  CHECK_FALSE(resolve_static(web.path, "/js/../../x").has_value());
  CHECK_FALSE(resolve_static(web.path, "/missing.css").has_value());
  CHECK_FALSE(resolve_static(web.path, "relative").has_value());
}

TEST_CASE("HTTP endpoints") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  TempDir web;
  web.write("index.html", "<p>jenny</p>");
  Server server(rig, {"127.0.0.1", 0, std::nullopt, std::nullopt, web.path});
  server.start();
  REQUIRE(server.port() != 0);
  CHECK_FALSE(server.tls());

  auto health = http_get(server.port(), "/healthz");
  CHECK(health.status == 200);
  CHECK(json::parse(health.body) == json{{"status", "ok"}});

  auto state = http_get(server.port(), "/state");
  CHECK(state.status == 200);
  CHECK(state.content_type == "application/json");
  CHECK(json::parse(state.body).at("type") == "snapshot");

  auto index = http_get(server.port(), "/");
  CHECK(index.status == 200);
  CHECK(index.body == "<p>jenny</p>");
  CHECK(index.content_type.rfind("text/html", 0) == 0);

  CHECK(http_get(server.port(), "/nothing.js").status == 404);
  CHECK(http_get(server.port(), "/ws").status == 426);
  server.stop();
}

TEST_CASE("without a web root only the API answers") {
  SimRig sim;
  Rig rig(sim.config);
  Server server(rig, {"127.0.0.1", 0, std::nullopt, std::nullopt, std::nullopt});
  server.start();
  CHECK(http_get(server.port(), "/").status == 404);
  CHECK(http_get(server.port(), "/healthz").status == 200);
}

TEST_CASE("TLS options must come in pairs") {
  SimRig sim;
  Rig rig(sim.config);
  CHECK_THROWS_AS(Server(rig, {"127.0.0.1", 0, "cert.pem", std::nullopt, std::nullopt}), std::invalid_argument);
}

TEST_CASE("WebSocket session end to end") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  rig.start_maintenance();
  Server server(rig, {"127.0.0.1", 0, std::nullopt, std::nullopt, std::nullopt});
  server.start();

  WsClient ws(server.port());
  auto r = ws.exchange({{"type", "select"}, {"group", "head"}, {"motor", 0}}, "ack");
  REQUIRE(r.size() == 1);
  CHECK(r[0].at("for") == "select");

  r = ws.exchange({{"type", "tilt"}, {"pitch_deg", 10}, {"roll_deg", 0}}, "ack");
  CHECK(r.back().at("moves")[0].at("steps") == 100);

  ws.send_text("not json");
  auto err = ws.receive();
  REQUIRE(err.has_value());
  CHECK(*err == json{{"type", "error"}, {"text", "malformed JSON"}});

  bool arrived = false;
  for (int i = 0; i < 100 && !arrived; ++i) {
    r = ws.exchange({{"type", "snapshot_request"}}, "snapshot");
    const auto& j = r.back().at("subsystems").at("head").at("joints").at(0);
    arrived = j.at("commanded_steps") == 100 && j.at("state") == "done";
    if (!arrived) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(arrived);

  // a second client gets its own selection
  WsClient other(server.port());
  r = other.exchange({{"type", "tilt"}, {"pitch_deg", 1}, {"roll_deg", 0}}, "error");
  CHECK(r.back().at("text") == "no selection");
  CHECK(server.sessions_served() >= 1);
  rig.stop();
  server.stop();
}
