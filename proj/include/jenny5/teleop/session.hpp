#pragma once

// One client's view of the robot: its selection, its running behavior, and the
// mapping from client messages to rig operations. Transport agnostic.

#include "jenny5/teleop/messages.hpp"
#include "jenny5/teleop/rig.hpp"

#include <json.hpp>

#include <optional>
#include <string_view>
#include <vector>

namespace jenny5::teleop {

class Session {
 public:
  explicit Session(Rig& rig) : rig_(rig) {}

  /// Replies to one text frame, in send order.
  std::vector<nlohmann::json> handle_text(std::string_view text);
  std::vector<nlohmann::json> handle(const ClientMessage& message);

  const std::optional<msg::Select>& selection() const { return selection_; }
  std::optional<BehaviorName> behavior() const { return behavior_; }

 private:
  std::vector<nlohmann::json> on(const msg::Select& m);
  std::vector<nlohmann::json> on(const msg::Tilt& m);
  std::vector<nlohmann::json> on(const msg::SnapshotRequest& m);
  std::vector<nlohmann::json> on(const msg::TextCommand& m);
  std::vector<nlohmann::json> on(const msg::BehaviorStart& m);
  std::vector<nlohmann::json> on(const msg::BehaviorStop& m);
  std::vector<nlohmann::json> on(const msg::SyntheticDetection& m);

  std::vector<nlohmann::json> behavior_failed(const std::string& why);

  Rig& rig_;
  std::optional<msg::Select> selection_;
  std::optional<BehaviorName> behavior_;
};

}  // namespace jenny5::teleop
