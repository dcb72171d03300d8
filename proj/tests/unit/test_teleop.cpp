#include "jenny5/teleop/behaviors.hpp"
#include "jenny5/teleop/messages.hpp"
#include "jenny5/teleop/rig.hpp"
#include "jenny5/teleop/session.hpp"
#include "jenny5/teleop/tilt.hpp"
#include "random.hpp"
#include "sim_rig.hpp"

#include <doctest.h>

#include <cmath>
#include <thread>

using namespace jenny5;
using namespace jenny5::teleop;
using jenny5::testing::Gen;
using jenny5::testing::SimRig;
using nlohmann::json;

namespace {

template <class Pred>
bool eventually(Pred pred, std::chrono::milliseconds limit = std::chrono::seconds(3)) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return pred();
}

std::string parse_error(std::string_view text) {
  auto parsed = parse_client_message(text);
  auto* e = std::get_if<std::string>(&parsed);
  return e ? *e : std::string();
}

ClientMessage parse_ok(std::string_view text) {
  auto parsed = parse_client_message(text);
  REQUIRE(std::holds_alternative<ClientMessage>(parsed));
  return std::get<ClientMessage>(parsed);
}

}  // namespace

TEST_CASE("client message parsing") {
  auto sel = std::get<msg::Select>(parse_ok(R"({"type":"select","group":"head","motor":0})"));
  CHECK(sel.group == Group::Head);
  CHECK(sel.motors == std::vector<int>{0});
  sel = std::get<msg::Select>(parse_ok(R"({"type":"select","group":"left_arm","motor":[2,3]})"));
  CHECK(sel.motors == std::vector<int>{2, 3});
  sel = std::get<msg::Select>(parse_ok(R"({"type":"select","group":"platform"})"));
  CHECK(sel.motors.empty());

  auto tilt = std::get<msg::Tilt>(parse_ok(R"({"type":"tilt","pitch_deg":10,"roll_deg":-4.5})"));
  CHECK(tilt.pitch_deg == 10);
  CHECK(tilt.roll_deg == -4.5);
  CHECK(std::holds_alternative<msg::SnapshotRequest>(parse_ok(R"({"type":"snapshot_request"})")));
  CHECK(std::get<msg::TextCommand>(parse_ok(R"({"type":"text_command","text":"Home"})")).text == "Home");
  CHECK(std::get<msg::BehaviorStart>(parse_ok(R"({"type":"behavior_start","name":"follow_person"})")).name ==
        BehaviorName::FollowPerson);
  CHECK(std::holds_alternative<msg::BehaviorStop>(parse_ok(R"({"type":"behavior_stop"})")));
  auto det = std::get<msg::SyntheticDetection>(
      parse_ok(R"({"type":"synthetic_detection","offset_x":0.5,"offset_y":-0.25,"apparent_size":0.3})"));
  CHECK(det.offset_y == -0.25);
}

TEST_CASE("client message errors") {
  CHECK(parse_error("{") == "malformed JSON");
  CHECK(parse_error("[1,2]") == "message must be a JSON object");
  CHECK(parse_error(R"({"group":"head"})") == "missing string field: type");
  CHECK(parse_error(R"({"type":"dance"})") == "unknown message type: dance");
  CHECK(parse_error(R"({"type":"select","group":"tail","motor":0})") == "unknown group");
  CHECK(parse_error(R"({"type":"select","group":"head"})") == "missing field: motor");
  CHECK(parse_error(R"({"type":"select","group":"head","motor":[1,1]})") == "motor pair must name two motors");
  CHECK(parse_error(R"({"type":"select","group":"head","motor":[1]})") == "motor pair must have two entries");
  CHECK(parse_error(R"({"type":"select","group":"head","motor":255})") == "motor index out of range");
  CHECK(parse_error(R"({"type":"select","group":"head","motor":1.5})") == "motor must be an integer index");
  CHECK(parse_error(R"({"type":"tilt","pitch_deg":91,"roll_deg":0})") == "field out of range: pitch_deg");
  CHECK(parse_error(R"({"type":"tilt","pitch_deg":"1","roll_deg":0})") == "field must be a number: pitch_deg");
  CHECK(parse_error(R"({"type":"tilt","pitch_deg":1})") == "missing field: roll_deg");
  CHECK(parse_error(R"({"type":"behavior_start","name":"dance"})") == "unknown behavior");
  CHECK(parse_error(R"({"type":"synthetic_detection","offset_x":0,"offset_y":0,"apparent_size":1.5})") ==
        "field out of range: apparent_size");
}

TEST_CASE("client messages survive to_json and back") {
  Gen g(31);
  const char* groups[] = {"left_arm", "right_arm", "head", "platform", "leg"};
  for (int i = 0; i < 1000; ++i) {
    ClientMessage m;
    switch (g.integer<int>(0, 6)) {
      case 0: {
        msg::Select s{*group_from_string(groups[g.integer<int>(0, 4)]), {}};
        int a = g.integer<int>(0, 5);
        if (g.coin(0.5)) {
          s.motors = {a, (a + 1 + g.integer<int>(0, 4)) % 6};
        } else if (!is_duty_group(s.group) || g.coin(0.5)) {
          s.motors = {a};
        }
        m = s;
        break;
      }
      case 1: m = msg::Tilt{g.real(-90, 90), g.real(-90, 90)}; break;
      case 2: m = msg::SnapshotRequest{}; break;
      case 3: m = msg::TextCommand{g.printable(g.integer<std::size_t>(0, 12))}; break;
      case 4: m = msg::BehaviorStart{g.coin(0.5) ? BehaviorName::CenterHead : BehaviorName::FollowPerson}; break;
      case 5: m = msg::BehaviorStop{}; break;
      default: m = msg::SyntheticDetection{g.real(-1, 1), g.real(-1, 1), g.real(0, 1)}; break;
    }
    auto back = parse_client_message(to_json(m).dump());
    REQUIRE(std::holds_alternative<ClientMessage>(back));
    REQUIRE(std::get<ClientMessage>(back) == m);
  }
}

TEST_CASE("reply frames") {
  CHECK(make_ack("select", {{"group", "head"}}) == json{{"type", "ack"}, {"for", "select"}, {"group", "head"}});
  CHECK(make_error("x") == json{{"type", "error"}, {"text", "x"}});
  CHECK(make_behavior_status(BehaviorName::CenterHead, "running") ==
        json{{"type", "behavior_status"}, {"name", "center_head"}, {"state", "running"}});
}

TEST_CASE("tilt to steps") {
  CHECK(tilt_to_steps(10, 10) == 100);
  CHECK(tilt_to_steps(-2.5, 20) == -50);
  CHECK_FALSE(tilt_to_steps(0.04, 10).has_value());
  CHECK(tilt_to_steps(0.05, 10) == 1);
  Gen g(32);
  for (int i = 0; i < 1000; ++i) {
    double a = g.real(-90, 90);
    double k = g.real(0.1, 50);
    auto s = tilt_to_steps(a, k);
    double exact = a * k;
    if (s) {
      REQUIRE(std::abs(*s - exact) <= 0.5);
      REQUIRE(*s != 0);
    } else {
      REQUIRE(std::abs(exact) < 0.5);
    }
  }
}

TEST_CASE("tilt to duty") {
  CHECK(tilt_to_duty(20, 0, 500, 300) == DutyPair{10000, 10000});
  CHECK(tilt_to_duty(0, 10, 500, 300) == DutyPair{3000, -3000});
  CHECK(tilt_to_duty(10, 5, 500, 300) == DutyPair{6500, 3500});
  CHECK(tilt_to_duty(90, 90, 500, 300) == DutyPair{32767, 32767 - 32767 + 18000});
  CHECK(tilt_to_duty(-90, 0, 800, 0) == DutyPair{-32767, -32767});
  Gen g(33);
  for (int i = 0; i < 1000; ++i) {
    double p = g.real(-90, 90), r = g.real(-90, 90), k = g.real(0, 1000), t = g.real(0, 1000);
    auto d = tilt_to_duty(p, r, k, t);
    double m1 = std::clamp(p * k + r * t, -32767.0, 32767.0);
    double m2 = std::clamp(p * k - r * t, -32767.0, 32767.0);
    REQUIRE(std::abs(d.m1 - m1) <= 0.5);
    REQUIRE(std::abs(d.m2 - m2) <= 0.5);
  }
}

TEST_CASE("center_head correction") {
  BehaviorConfig b;
  auto c = center_head_step(b, 0.5, 0.0);
  CHECK(c.pan_steps == -100);
  CHECK_FALSE(c.tilt_steps.has_value());
  c = center_head_step(b, -0.25, 0.3);
  CHECK(c.pan_steps == 50);
  CHECK(c.tilt_steps == -60);
  CHECK(center_head_step(b, 0.04, -0.049).centered());
  CHECK_FALSE(center_head_step(b, 0.05, 0).centered());
}

TEST_CASE("follow_person decision") {
  BehaviorConfig b;
  CHECK(follow_person_step(b, 0.8) == FollowAction::Backward);
  CHECK(follow_person_step(b, 0.5) == FollowAction::Stop);
  CHECK(follow_person_step(b, 0.2) == FollowAction::Forward);
  CHECK(follow_person_step(b, 0.6) == FollowAction::Stop);
  CHECK(follow_person_step(b, 0.4) == FollowAction::Stop);
}

TEST_CASE("center_head converges under the head optics") {
  // The face sits at a fixed bearing; the camera reports (head - face)/35 as the
  // normalized offset, and one head step turns the pan axis by 1.8/27 degrees.
  BehaviorConfig b;
  const double deg_per_step = 1.8 / 27;
  Gen g(34);
  for (int trial = 0; trial < 500; ++trial) {
    double head = 0;
    double face = g.real(-35, 35);
    int iterations = 0;
    for (; iterations < 100; ++iterations) {
      double offset = std::clamp((head - face) / 35.0, -1.0, 1.0);
      auto c = center_head_step(b, offset, 0);
      if (c.centered()) break;
      head += *c.pan_steps * deg_per_step;
    }
    REQUIRE(iterations <= 20);
    REQUIRE(std::abs(head - face) / 35.0 < b.deadband);
  }
}

TEST_CASE("rig config from the shipped file") {
  auto c = load_rig_config(jenny5::testing::config_path("rig.json"));
  CHECK(c.scufy.size() == 3);
  CHECK(c.duty.size() == 2);
  CHECK(c.rate_limit == std::chrono::milliseconds(100));
  CHECK(c.scufy.at(Group::Head).joint(0)->steps_per_degree == 10);
  CHECK(c.duty.at(Group::Leg).address == 0x81);
  CHECK(c.duty.at(Group::Platform).duty_per_degree == 500);
  CHECK(c.behaviors.kp == 200);
}

TEST_CASE("rate limiter coalesces commands inside the window") {
  SimRig sim;
  auto now = Clock::now();
  Rig rig(sim.config, [&] { return now; });
  REQUIRE(rig.connect_all().empty());

  auto position = [&](int motor) {
    return sim.with_scufy(Group::Head, [&](sim::VirtualBoard& b) { return b.stepper(motor).current_position; });
  };
  REQUIRE(rig.move_steps(Group::Head, 0, 10));
  CHECK(rig.commands_sent(Group::Head, 0) == 1);
  REQUIRE(eventually([&] { return position(0) == 10; }));
  auto o = rig.move_steps(Group::Head, 0, 20);
  CHECK(o);
  CHECK(o.deferred);
  o = rig.move_steps(Group::Head, 0, 30);
  CHECK(o.deferred);
  // other motors have their own window
  CHECK_FALSE(rig.move_steps(Group::Head, 1, 5).deferred);

  now += std::chrono::milliseconds(50);
  rig.maintenance();
  CHECK(rig.commands_sent(Group::Head, 0) == 1);

  now += std::chrono::milliseconds(60);
  rig.maintenance();
  CHECK(rig.commands_sent(Group::Head, 0) == 2);
  rig.maintenance();
  CHECK(rig.commands_sent(Group::Head, 0) == 2);

  // the queued command was the latest one
  CHECK(eventually([&] { return position(0) == 40; }));

  // at most one per window over a burst
  for (int i = 0; i < 50; ++i) {
    rig.move_steps(Group::Head, 1, 1);
    rig.maintenance();
    now += std::chrono::milliseconds(10);
  }
  auto sent = rig.commands_sent(Group::Head, 1);
  CHECK(sent >= 5);
  CHECK(sent <= 1 + 1 + 5);

  REQUIRE(rig.drive_duty(Group::Platform, {100, 100}));
  CHECK(rig.drive_duty(Group::Platform, {200, 200}).deferred);
  now += std::chrono::milliseconds(100);
  rig.maintenance();
  CHECK(rig.commands_sent(Group::Platform, 0) == 2);
}

TEST_CASE("session: select and tilt drive the boards") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  rig.start_maintenance();
  Session s(rig);

  auto r = s.handle_text(R"({"type":"tilt","pitch_deg":5,"roll_deg":0})");
  REQUIRE(r.size() == 1);
  CHECK(r[0] == make_error("no selection"));

  r = s.handle_text(R"({"type":"select","group":"head","motor":0})");
  CHECK(r[0] == json{{"type", "ack"}, {"for", "select"}, {"group", "head"}, {"motor", {0}}});
  r = s.handle_text(R"({"type":"tilt","pitch_deg":10,"roll_deg":0})");
  REQUIRE(r[0].at("type") == "ack");
  CHECK(r[0].at("moves") == json::array({{{"motor", 0}, {"steps", 100}}}));
  CHECK(eventually([&] {
    return sim.with_scufy(Group::Head, [](sim::VirtualBoard& b) { return b.stepper(0).target_position == 100; });
  }));

  r = s.handle_text(R"({"type":"select","group":"head","motor":9})");
  CHECK(r[0] == make_error("head: no motor 9"));
  CHECK(s.selection()->group == Group::Head);

  r = s.handle_text(R"({"type":"select","group":"platform"})");
  REQUIRE(r[0].at("type") == "ack");
  r = s.handle_text(R"({"type":"tilt","pitch_deg":20,"roll_deg":0})");
  REQUIRE(r[0].at("type") == "ack");
  CHECK(r[0].at("duty") == json::array({10000, 10000}));
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) {
      return e.channel(0).target_duty == 10000 && e.channel(1).target_duty == 10000;
    });
  }));

  r = s.handle_text(R"({"type":"select","group":"left_arm","motor":[0,1]})");
  REQUIRE(r[0].at("type") == "ack");
  r = s.handle_text(R"({"type":"tilt","pitch_deg":1,"roll_deg":-2})");
  REQUIRE(r[0].at("type") == "ack");
  CHECK(r[0].at("moves") == json::array({{{"motor", 0}, {"steps", 20}}, {{"motor", 1}, {"steps", -40}}}));

  rig.stop();
}

TEST_CASE("session: text commands") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  Session s(rig);

  CHECK(s.handle_text(R"({"type":"text_command","text":"home"})")[0] == make_error("no selection"));
  CHECK(s.handle_text(R"({"type":"text_command","text":"  "})")[0] == make_error("empty command"));
  CHECK(s.handle_text(R"({"type":"text_command","text":""})")[0] == make_error("empty command"));
  CHECK(s.handle_text(R"({"type":"text_command","text":"dance"})")[0] == make_error("unknown command: dance"));

  s.handle_text(R"({"type":"select","group":"head","motor":0})");
  auto r = s.handle_text(R"({"type":"text_command","text":" HOME "})");
  CHECK(r[0] == json{{"type", "ack"}, {"for", "text_command"}, {"command", "home"}, {"group", "head"}});
  CHECK(rig.commands_sent(Group::Head, 0) == 1);
  CHECK(rig.commands_sent(Group::Head, 1) == 1);

  r = s.handle_text(R"({"type":"text_command","text":"forward"})");
  CHECK(r[0].at("command") == "forward");
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) { return e.channel(0).target_duty == 8000; });
  }));
  r = s.handle_text(R"({"type":"text_command","text":"backward"})");
  CHECK(r[0].at("command") == "back");

  s.handle_text(R"({"type":"behavior_start","name":"center_head"})");
  r = s.handle_text(R"({"type":"text_command","text":"stop"})");
  REQUIRE(r.size() == 2);
  CHECK(r[0] == make_behavior_status(BehaviorName::CenterHead, "stopped"));
  CHECK(r[1] == json{{"type", "ack"}, {"for", "text_command"}, {"command", "stop"}});
  CHECK_FALSE(s.behavior().has_value());
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) {
      return e.channel(0).target_duty == 0 && e.channel(1).target_duty == 0;
    });
  }));
}

TEST_CASE("session: stop halts a moving arm") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  rig.start_maintenance();
  Session s(rig);
  s.handle_text(R"({"type":"select","group":"left_arm","motor":0})");
  s.handle_text(R"({"type":"tilt","pitch_deg":30,"roll_deg":0})");
  REQUIRE(eventually([&] {
    return sim.with_scufy(Group::LeftArm, [](sim::VirtualBoard& b) { return b.stepper(0).current_position > 0; });
  }));
  s.handle_text(R"({"type":"text_command","text":"stop"})");
  REQUIRE(eventually([&] {
    return sim.with_scufy(Group::LeftArm, [](sim::VirtualBoard& b) { return !b.any_moving(); });
  }));
  auto stopped_at = sim.with_scufy(Group::LeftArm, [](sim::VirtualBoard& b) { return b.stepper(0).current_position; });
  CHECK(stopped_at < 600);
  rig.stop();
}

TEST_CASE("session: behaviors") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  rig.start_maintenance();
  Session s(rig);

  CHECK(s.handle_text(R"({"type":"behavior_stop"})")[0] == make_error("no behavior running"));
  CHECK(s.handle_text(R"({"type":"synthetic_detection","offset_x":0,"offset_y":0,"apparent_size":0.5})")[0] ==
        make_error("no behavior running"));

  auto r = s.handle_text(R"({"type":"behavior_start","name":"center_head"})");
  CHECK(r[0] == make_behavior_status(BehaviorName::CenterHead, "running"));
  r = s.handle_text(R"({"type":"synthetic_detection","offset_x":0.5,"offset_y":0.02,"apparent_size":0.5})");
  CHECK(r[0].at("pan_steps") == -100);
  CHECK(r[0].at("tilt_steps").is_null());
  CHECK(r[0].at("centered") == false);
  CHECK(eventually([&] {
    return sim.with_scufy(Group::Head, [](sim::VirtualBoard& b) { return b.stepper(0).target_position == -100; });
  }));

  r = s.handle_text(R"({"type":"behavior_start","name":"follow_person"})");
  REQUIRE(r.size() == 2);
  CHECK(r[0] == make_behavior_status(BehaviorName::CenterHead, "stopped"));
  CHECK(r[1] == make_behavior_status(BehaviorName::FollowPerson, "running"));
  r = s.handle_text(R"({"type":"synthetic_detection","offset_x":0,"offset_y":0,"apparent_size":0.2})");
  CHECK(r[0].at("action") == "forward");
  CHECK(r[0].at("duty") == 8000);
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) { return e.channel(1).target_duty == 8000; });
  }));
  r = s.handle_text(R"({"type":"synthetic_detection","offset_x":0,"offset_y":0,"apparent_size":0.8})");
  CHECK(r[0].at("action") == "backward");
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) { return e.channel(1).target_duty == -8000; });
  }));
  r = s.handle_text(R"({"type":"behavior_stop"})");
  CHECK(r[0] == make_behavior_status(BehaviorName::FollowPerson, "stopped"));
  CHECK(eventually([&] {
    return sim.with_roboclaw(Group::Platform, [](roboclaw::Emulator& e) { return e.channel(1).target_duty == 0; });
  }));
  rig.stop();
}

TEST_CASE("snapshot at rest") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  auto a = rig.snapshot();
  CHECK(a.at("type") == "snapshot");
  CHECK(a.at("errors").empty());
  for (const char* name : {"left_arm", "right_arm", "head"}) {
    for (const auto& j : a.at("subsystems").at(name).at("joints")) {
      if (j.at("sensor").is_null()) {
        CHECK(j.at("angle_deg").is_null());
        continue;
      }
      CHECK(j.at("raw") == 180);
      CHECK(j.at("angle_deg") == doctest::Approx(180.0));
      CHECK(j.at("commanded_steps") == 0);
      CHECK(j.at("state") == "idle");
    }
  }
  CHECK(a.at("platform_duty_pct") == json::array({0.0, 0.0}));
  CHECK(a.at("battery_v") == doctest::Approx(16.8));
  CHECK(a.at("leg_height_cm") == doctest::Approx(65.0));

  auto b = rig.snapshot();
  a.erase("timestamp_ms");
  b.erase("timestamp_ms");
  CHECK(a == b);
  CHECK(rig.last_snapshot().at("type") == "snapshot");
}

TEST_CASE("snapshot tracks a move") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  REQUIRE(rig.move_steps(Group::Head, 0, 150));
  REQUIRE(eventually([&] {
    return sim.with_scufy(Group::Head, [](sim::VirtualBoard& b) { return b.stepper(0).current_position == 150; });
  }));
  json j;
  // the completion frame may still be on the wire
  CHECK(eventually([&] {
    j = rig.snapshot().at("subsystems").at("head").at("joints").at(0);
    return j.at("state") == "done";
  }));
  CHECK(j.at("commanded_steps") == 150);
  // 150 steps of 1.8/27 degrees from 180
  CHECK(j.at("raw") == 190);
}

TEST_CASE("a dead board degrades only its own subsystem") {
  SimRig sim(1.0, {Group::Head});
  Rig rig(sim.config);
  auto errors = rig.connect_all();
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].rfind("head: ", 0) == 0);
  CHECK_FALSE(rig.online(Group::Head));
  CHECK(rig.online(Group::Platform));

  auto snap = rig.snapshot();
  CHECK(snap.at("subsystems").at("head").is_null());
  REQUIRE(snap.at("errors").size() == 1);
  CHECK(snap.at("errors")[0].get<std::string>().rfind("head: ", 0) == 0);
  CHECK(snap.at("subsystems").at("left_arm").is_object());

  Session s(rig);
  s.handle_text(R"({"type":"select","group":"head","motor":0})");
  auto r = s.handle_text(R"({"type":"tilt","pitch_deg":10,"roll_deg":0})");
  CHECK(r[0].at("type") == "error");
  s.handle_text(R"({"type":"select","group":"platform"})");
  r = s.handle_text(R"({"type":"tilt","pitch_deg":10,"roll_deg":0})");
  CHECK(r[0].at("type") == "ack");

  r = s.handle_text(R"({"type":"behavior_start","name":"center_head"})");
  REQUIRE(r.size() == 2);
  CHECK(r[0].at("type") == "error");
  CHECK(r[1] == make_behavior_status(BehaviorName::CenterHead, "failed"));
}

TEST_CASE("killing a board mid-session") {
  SimRig sim;
  Rig rig(sim.config);
  REQUIRE(rig.connect_all().empty());
  sim.kill(Group::Head);
  REQUIRE(eventually([&] {
    auto snap = rig.snapshot();
    return snap.at("subsystems").at("head").is_null();
  }));
  CHECK_FALSE(rig.online(Group::Head));
  auto snap = rig.snapshot();
  CHECK(snap.at("subsystems").at("platform").is_object());
  CHECK(snap.at("subsystems").at("left_arm").is_object());
  CHECK(rig.drive_duty(Group::Platform, {500, 500}));
  CHECK_FALSE(rig.move_steps(Group::Head, 0, 10));
}
