#include "jenny5/teleop/session.hpp"

#include <algorithm>
#include <cctype>

namespace jenny5::teleop {

using nlohmann::json;

std::vector<json> Session::handle_text(std::string_view text) {
  auto parsed = parse_client_message(text);
  if (auto* error = std::get_if<std::string>(&parsed)) return {make_error(*error)};
  return handle(std::get<ClientMessage>(parsed));
}

std::vector<json> Session::handle(const ClientMessage& message) {
  return std::visit([this](const auto& m) { return on(m); }, message);
}

std::vector<json> Session::on(const msg::Select& m) {
  const auto& cfg = rig_.config();
  const std::string name(to_string(m.group));
  if (is_duty_group(m.group)) {
    if (!cfg.duty.contains(m.group)) return {make_error(name + ": not configured")};
  } else {
    auto it = cfg.scufy.find(m.group);
    if (it == cfg.scufy.end()) return {make_error(name + ": not configured")};
    for (int motor : m.motors) {
      if (static_cast<std::size_t>(motor) >= it->second.motors.size()) {
        return {make_error(name + ": no motor " + std::to_string(motor))};
      }
    }
  }
  selection_ = m;
  return {make_ack("select", {{"group", name}, {"motor", m.motors}})};
}

std::vector<json> Session::on(const msg::Tilt& m) {
  if (!selection_) return {make_error("no selection")};
  const auto& sel = *selection_;
  const auto& cfg = rig_.config();

  if (is_duty_group(sel.group)) {
    const auto& d = cfg.duty.at(sel.group);
    auto duty = tilt_to_duty(m.pitch_deg, m.roll_deg, d.duty_per_degree, d.turn_per_degree);
    auto out = rig_.drive_duty(sel.group, duty);
    if (!out) return {make_error(*out.error)};
    return {make_ack("tilt", {{"duty", {duty.m1, duty.m2}}, {"deferred", out.deferred}})};
  }

  const auto& s = cfg.scufy.at(sel.group);
  auto gain = [&](int motor) {
    const auto* j = s.joint(motor);
    return j ? j->steps_per_degree : JointConfig{}.steps_per_degree;
  };
  std::vector<std::pair<int, std::int32_t>> commands;
  if (auto steps = tilt_to_steps(m.pitch_deg, gain(sel.motors[0]))) commands.emplace_back(sel.motors[0], *steps);
  if (sel.motors.size() == 2) {
    if (auto steps = tilt_to_steps(m.roll_deg, gain(sel.motors[1]))) commands.emplace_back(sel.motors[1], *steps);
  }
  json issued = json::array();
  bool deferred = false;
  for (const auto& [motor, steps] : commands) {
    auto out = rig_.move_steps(sel.group, motor, steps);
    if (!out) return {make_error(*out.error)};
    deferred = deferred || out.deferred;
    issued.push_back({{"motor", motor}, {"steps", steps}});
  }
  return {make_ack("tilt", {{"moves", issued}, {"deferred", deferred}})};
}

std::vector<json> Session::on(const msg::SnapshotRequest&) { return {rig_.snapshot()}; }

std::vector<json> Session::on(const msg::TextCommand& m) {
  std::string text;
  for (char c : m.text) text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto first = text.find_first_not_of(" \t\r\n");
  auto last = text.find_last_not_of(" \t\r\n");
  text = first == std::string::npos ? std::string() : text.substr(first, last - first + 1);

  if (text == "stop") {
    std::vector<json> replies;
    if (behavior_) {
      replies.push_back(make_behavior_status(*behavior_, "stopped"));
      behavior_.reset();
    }
    auto out = rig_.stop_all();
    if (!out) replies.push_back(make_error(*out.error));
    replies.push_back(make_ack("text_command", {{"command", "stop"}}));
    return replies;
  }
  if (text == "home") {
    if (!selection_) return {make_error("no selection")};
    auto out = rig_.home(selection_->group);
    if (!out) return {make_error(*out.error)};
    return {make_ack("text_command", {{"command", "home"}, {"group", to_string(selection_->group)}})};
  }
  if (text == "forward" || text == "back" || text == "backward") {
    auto out = rig_.pulse(Group::Platform, text == "forward" ? 1 : -1);
    if (!out) return {make_error(*out.error)};
    return {make_ack("text_command", {{"command", text == "forward" ? "forward" : "back"}})};
  }
  if (text.empty()) return {make_error("empty command")};
  return {make_error("unknown command: " + text)};
}

std::vector<json> Session::on(const msg::BehaviorStart& m) {
  Group needs = m.name == BehaviorName::CenterHead ? Group::Head : Group::Platform;
  std::vector<json> replies;
  if (behavior_ && *behavior_ != m.name) replies.push_back(make_behavior_status(*behavior_, "stopped"));
  behavior_ = m.name;
  if (!rig_.online(needs)) {
    auto more = behavior_failed(rig_.subsystem_error(needs).value_or(std::string(to_string(needs)) + ": offline"));
    replies.insert(replies.end(), more.begin(), more.end());
    return replies;
  }
  replies.push_back(make_behavior_status(m.name, "running"));
  return replies;
}

std::vector<json> Session::on(const msg::BehaviorStop&) {
  if (!behavior_) return {make_error("no behavior running")};
  auto name = *behavior_;
  behavior_.reset();
  if (name == BehaviorName::FollowPerson) rig_.drive_duty(Group::Platform, {});
  return {make_behavior_status(name, "stopped")};
}

std::vector<json> Session::behavior_failed(const std::string& why) {
  auto name = *behavior_;
  behavior_.reset();
  return {make_error(why), make_behavior_status(name, "failed")};
}

std::vector<json> Session::on(const msg::SyntheticDetection& m) {
  if (!behavior_) return {make_error("no behavior running")};
  const auto& b = rig_.config().behaviors;

  if (*behavior_ == BehaviorName::CenterHead) {
    auto correction = center_head_step(b, m.offset_x, m.offset_y);
    json extra{{"pan_steps", nullptr}, {"tilt_steps", nullptr}, {"centered", correction.centered()}};
    if (correction.pan_steps) {
      auto out = rig_.move_steps(Group::Head, b.head_pan_motor, *correction.pan_steps);
      if (!out) return behavior_failed(*out.error);
      extra["pan_steps"] = *correction.pan_steps;
    }
    if (correction.tilt_steps) {
      auto out = rig_.move_steps(Group::Head, b.head_tilt_motor, *correction.tilt_steps);
      if (!out) return behavior_failed(*out.error);
      extra["tilt_steps"] = *correction.tilt_steps;
    }
    return {make_ack("synthetic_detection", extra)};
  }

  auto action = follow_person_step(b, m.apparent_size);
  int duty = action == FollowAction::Forward ? b.follow_duty : action == FollowAction::Backward ? -b.follow_duty : 0;
  auto out = rig_.drive_duty(Group::Platform, {duty, duty});
  if (!out) return behavior_failed(*out.error);
  const char* name = action == FollowAction::Forward ? "forward" : action == FollowAction::Backward ? "backward" : "stop";
  return {make_ack("synthetic_detection", {{"action", name}, {"duty", duty}})};
}

}  // namespace jenny5::teleop
