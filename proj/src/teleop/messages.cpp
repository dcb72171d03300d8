#include "jenny5/teleop/messages.hpp"

#include <array>
#include <cmath>

namespace jenny5::teleop {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Group, std::string_view>, 5> kGroups{{
    {Group::LeftArm, "left_arm"},
    {Group::RightArm, "right_arm"},
    {Group::Head, "head"},
    {Group::Platform, "platform"},
    {Group::Leg, "leg"},
}};

struct BadMessage {
  std::string text;
};

double number_in(const json& obj, const char* key, double lo, double hi) {
  if (!obj.contains(key)) throw BadMessage{std::string("missing field: ") + key};
  const auto& v = obj.at(key);
  if (!v.is_number()) throw BadMessage{std::string("field must be a number: ") + key};
  double d = v.get<double>();
  if (!std::isfinite(d) || d < lo || d > hi) {
    throw BadMessage{std::string("field out of range: ") + key};
  }
  return d;
}

std::string string_field(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw BadMessage{std::string("missing string field: ") + key};
  }
  return obj.at(key).get<std::string>();
}

int motor_index(const json& v) {
  if (!v.is_number_integer()) throw BadMessage{"motor must be an integer index"};
  auto i = v.get<std::int64_t>();
  if (i < 0 || i > 254) throw BadMessage{"motor index out of range"};
  return static_cast<int>(i);
}

ClientMessage parse(const json& doc) {
  if (!doc.is_object()) throw BadMessage{"message must be a JSON object"};
  std::string type = string_field(doc, "type");
  if (type == "select") {
    msg::Select s;
    auto group = group_from_string(string_field(doc, "group"));
    if (!group) throw BadMessage{"unknown group"};
    s.group = *group;
    if (doc.contains("motor")) {
      const auto& m = doc.at("motor");
      if (m.is_array()) {
        if (m.size() != 2) throw BadMessage{"motor pair must have two entries"};
        s.motors = {motor_index(m[0]), motor_index(m[1])};
        if (s.motors[0] == s.motors[1]) throw BadMessage{"motor pair must name two motors"};
      } else {
        s.motors = {motor_index(m)};
      }
    } else if (!is_duty_group(s.group)) {
      throw BadMessage{"missing field: motor"};
    }
    return s;
  }
  if (type == "tilt") return msg::Tilt{number_in(doc, "pitch_deg", -90, 90), number_in(doc, "roll_deg", -90, 90)};
  if (type == "snapshot_request") return msg::SnapshotRequest{};
  if (type == "text_command") return msg::TextCommand{string_field(doc, "text")};
  if (type == "behavior_start") {
    auto name = behavior_from_string(string_field(doc, "name"));
    if (!name) throw BadMessage{"unknown behavior"};
    return msg::BehaviorStart{*name};
  }
  if (type == "behavior_stop") return msg::BehaviorStop{};
  if (type == "synthetic_detection") {
    return msg::SyntheticDetection{number_in(doc, "offset_x", -1, 1), number_in(doc, "offset_y", -1, 1),
                                   number_in(doc, "apparent_size", 0, 1)};
  }
  throw BadMessage{"unknown message type: " + type};
}

}  // namespace

std::string_view to_string(Group group) {
  for (const auto& [g, name] : kGroups) {
    if (g == group) return name;
  }
  return "unknown";
}

std::optional<Group> group_from_string(std::string_view text) {
  for (const auto& [g, name] : kGroups) {
    if (name == text) return g;
  }
  return std::nullopt;
}

std::string_view to_string(BehaviorName name) {
  return name == BehaviorName::CenterHead ? "center_head" : "follow_person";
}

std::optional<BehaviorName> behavior_from_string(std::string_view text) {
  if (text == "center_head") return BehaviorName::CenterHead;
  if (text == "follow_person") return BehaviorName::FollowPerson;
  return std::nullopt;
}

ParsedMessage parse_client_message(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return std::string("malformed JSON");
  try {
    return parse(doc);
  } catch (const BadMessage& e) {
    return e.text;
  } catch (const json::exception& e) {
    return std::string("malformed message: ") + e.what();
  }
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

json to_json(const ClientMessage& message) {
  return std::visit(
      Overloaded{
          [](const msg::Select& s) {
            json j{{"type", "select"}, {"group", to_string(s.group)}};
            if (s.motors.size() == 1) j["motor"] = s.motors[0];
            if (s.motors.size() == 2) j["motor"] = s.motors;
            return j;
          },
          [](const msg::Tilt& t) { return json{{"type", "tilt"}, {"pitch_deg", t.pitch_deg}, {"roll_deg", t.roll_deg}}; },
          [](const msg::SnapshotRequest&) { return json{{"type", "snapshot_request"}}; },
          [](const msg::TextCommand& t) { return json{{"type", "text_command"}, {"text", t.text}}; },
          [](const msg::BehaviorStart& b) { return json{{"type", "behavior_start"}, {"name", to_string(b.name)}}; },
          [](const msg::BehaviorStop&) { return json{{"type", "behavior_stop"}}; },
          [](const msg::SyntheticDetection& d) {
            return json{{"type", "synthetic_detection"},
                        {"offset_x", d.offset_x},
                        {"offset_y", d.offset_y},
                        {"apparent_size", d.apparent_size}};
          },
      },
      message);
}

json make_ack(std::string_view for_type, json extra) {
  json j{{"type", "ack"}, {"for", for_type}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

json make_error(std::string_view text) { return json{{"type", "error"}, {"text", text}}; }

json make_behavior_status(BehaviorName name, std::string_view state) {
  return json{{"type", "behavior_status"}, {"name", to_string(name)}, {"state", state}};
}

}  // namespace jenny5::teleop
