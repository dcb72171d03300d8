#pragma once

// JSON text frames exchanged on /ws. Every frame is an object with a "type".

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace jenny5::teleop {

enum class Group { LeftArm, RightArm, Head, Platform, Leg };

std::string_view to_string(Group group);
std::optional<Group> group_from_string(std::string_view text);
/// Groups driven through RoboClaw boards rather than Scufy boards.
inline bool is_duty_group(Group g) { return g == Group::Platform || g == Group::Leg; }

enum class BehaviorName { CenterHead, FollowPerson };
std::string_view to_string(BehaviorName name);
std::optional<BehaviorName> behavior_from_string(std::string_view text);

namespace msg {
struct Select {
  Group group = Group::Head;
  std::vector<int> motors;  // one index or a pair; empty for duty groups
  bool operator==(const Select&) const = default;
};
struct Tilt {
  double pitch_deg = 0;
  double roll_deg = 0;
  bool operator==(const Tilt&) const = default;
};
struct SnapshotRequest { bool operator==(const SnapshotRequest&) const = default; };
struct TextCommand {
  std::string text;
  bool operator==(const TextCommand&) const = default;
};
struct BehaviorStart {
  BehaviorName name = BehaviorName::CenterHead;
  bool operator==(const BehaviorStart&) const = default;
};
struct BehaviorStop { bool operator==(const BehaviorStop&) const = default; };
struct SyntheticDetection {
  double offset_x = 0;
  double offset_y = 0;
  double apparent_size = 0;
  bool operator==(const SyntheticDetection&) const = default;
};
}  // namespace msg

using ClientMessage = std::variant<msg::Select, msg::Tilt, msg::SnapshotRequest, msg::TextCommand,
                                   msg::BehaviorStart, msg::BehaviorStop, msg::SyntheticDetection>;

/// A parsed message, or the text for an error frame.
using ParsedMessage = std::variant<ClientMessage, std::string>;

ParsedMessage parse_client_message(std::string_view text);
nlohmann::json to_json(const ClientMessage& message);

nlohmann::json make_ack(std::string_view for_type, nlohmann::json extra = nlohmann::json::object());
nlohmann::json make_error(std::string_view text);
nlohmann::json make_behavior_status(BehaviorName name, std::string_view state);

}  // namespace jenny5::teleop
